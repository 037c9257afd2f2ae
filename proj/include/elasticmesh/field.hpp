#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace elasticmesh {

// Row-major 2D array of per-pixel values; (x, y) maps to index y*width + x,
// origin at the top-left pixel.
template <typename T>
class Field {
 public:
  Field() = default;

  Field(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  Field(int width, int height, std::vector<T> values)
      : width_(width), height_(height), data_(std::move(values)) {
    check_dims(width, height);
    if (data_.size() != pixel_count()) {
      throw std::invalid_argument("Field: got " + std::to_string(data_.size()) +
                                  " values for " + std::to_string(width) + "x" +
                                  std::to_string(height));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width_ && y >= 0 && y < height_;
  }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  T& operator()(int x, int y) { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const { return data_[index(x, y)]; }

  // Bounds-checked access.
  T at(int x, int y) const {
    if (!in_bounds(x, y)) {
      throw std::out_of_range("Field: pixel (" + std::to_string(x) + ", " +
                              std::to_string(y) + ") outside " +
                              std::to_string(width_) + "x" + std::to_string(height_));
    }
    return data_[index(x, y)];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
      throw std::invalid_argument("Field: dimensions must be at least 1x1, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    }
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// Greyscale raster; levels are real values in [0, 255].
struct Grid : Field<double> {
  using Field<double>::Field;
};

// Per-pixel z coordinate of the deforming mesh, dimensions matching its Grid.
struct HeightField : Field<double> {
  using Field<double>::Field;
};

// Rejects non-finite or out-of-range greyscale levels. NaN fails the
// range comparison, so no separate isfinite test is needed.
inline void require_grid_levels(const Grid& grid) {
  for (double g : grid.values()) {
    if (!(g >= 0.0 && g <= 255.0)) {
      throw std::invalid_argument("Grid: greyscale levels must be finite and in [0, 255]");
    }
  }
}

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* where) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch (" +
                                std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                " vs " + std::to_string(b.width()) + "x" +
                                std::to_string(b.height()) + ")");
  }
}

}  // namespace elasticmesh

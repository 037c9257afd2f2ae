#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "elasticmesh/field.hpp"

namespace elasticmesh {

// Per-pixel ternary sign of the mesh height: -1, 0 or +1.
struct SignMap : Field<std::int8_t> {
  using Field<std::int8_t>::Field;
};

// Per-pixel region ids, contiguous in [0, region_count).
struct LabelMap {
  Field<std::int32_t> labels;
  std::int32_t region_count = 0;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;
};

struct RegionStats {
  std::int32_t id = 0;
  std::int64_t pixel_count = 0;
  double mean_grey = 0.0;
  std::int8_t sign = 0;
};

using RegionTable = std::vector<RegionStats>;

// Thresholds heights into signs; |z| <= zero_tolerance counts as zero.
inline SignMap sign_map(const HeightField& heights, double zero_tolerance = 1e-9) {
  if (zero_tolerance < 0.0) {
    throw std::invalid_argument("sign_map: zero_tolerance must be nonnegative");
  }
  SignMap signs(heights.width(), heights.height(), 0);
  const auto z = heights.values();
  auto s = signs.values();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] > zero_tolerance) {
      s[i] = 1;
    } else if (z[i] < -zero_tolerance) {
      s[i] = -1;
    }
  }
  return signs;
}

// 4-connected components of equal key values. Labels are assigned in
// raster-scan first-encounter order starting at 0; a flood fill grows each
// component the moment its first pixel is reached, so the scan touches every
// pixel once.
template <typename T>
LabelMap label_components(const Field<T>& keys) {
  const int w = keys.width();
  const int h = keys.height();
  LabelMap result{Field<std::int32_t>(w, h, -1), 0};

  std::vector<std::size_t> frontier;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (result.labels(x0, y0) >= 0) continue;
      const std::int32_t label = result.region_count++;
      const T key = keys(x0, y0);
      result.labels(x0, y0) = label;
      frontier.clear();
      frontier.push_back(keys.index(x0, y0));
      while (!frontier.empty()) {
        const std::size_t i = frontier.back();
        frontier.pop_back();
        const int x = static_cast<int>(i % static_cast<std::size_t>(w));
        const int y = static_cast<int>(i / static_cast<std::size_t>(w));
        static constexpr int kDx[4] = {0, 0, -1, 1};
        static constexpr int kDy[4] = {-1, 1, 0, 0};
        for (int n = 0; n < 4; ++n) {
          const int nx = x + kDx[n];
          const int ny = y + kDy[n];
          if (!keys.in_bounds(nx, ny)) continue;
          if (result.labels(nx, ny) >= 0 || keys(nx, ny) != key) continue;
          result.labels(nx, ny) = label;
          frontier.push_back(keys.index(nx, ny));
        }
      }
    }
  }
  return result;
}

// Groups 4-adjacent pixels of equal sign into regions (0 == 0 included).
inline LabelMap cluster_regions(const SignMap& signs) {
  return label_components(signs);
}

// Per-region pixel count, mean greyscale and sign.
inline RegionTable region_stats(const LabelMap& labels, const Grid& grid,
                                const SignMap& signs) {
  require_same_size(labels.labels, grid, "region_stats");
  require_same_size(labels.labels, signs, "region_stats");
  if (labels.region_count < 1) {
    throw std::invalid_argument("region_stats: label map has no regions");
  }

  RegionTable table(static_cast<std::size_t>(labels.region_count));
  std::vector<double> sums(table.size(), 0.0);
  for (std::size_t r = 0; r < table.size(); ++r) {
    table[r].id = static_cast<std::int32_t>(r);
  }
  const auto ids = labels.labels.values();
  const auto g = grid.values();
  const auto s = signs.values();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= labels.region_count) {
      throw std::invalid_argument("region_stats: label out of range");
    }
    const auto r = static_cast<std::size_t>(ids[i]);
    sums[r] += g[i];
    if (table[r].pixel_count == 0) table[r].sign = s[i];
    ++table[r].pixel_count;
  }
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (table[r].pixel_count == 0) {
      throw std::invalid_argument("region_stats: empty region id " + std::to_string(r));
    }
    table[r].mean_grey = sums[r] / static_cast<double>(table[r].pixel_count);
  }
  return table;
}

}  // namespace elasticmesh

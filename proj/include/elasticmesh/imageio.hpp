#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "elasticmesh/errors.hpp"
#include "elasticmesh/field.hpp"
#include "elasticmesh/merging.hpp"
#include "elasticmesh/mesh.hpp"
#include "elasticmesh/segmentation.hpp"

namespace elasticmesh {

namespace detail {

inline std::string format_number(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

struct PgmParser {
  std::string_view in;
  std::size_t pos = 0;

  bool eof() const { return pos >= in.size(); }
  unsigned char peek() const { return static_cast<unsigned char>(in[pos]); }

  void skip_space_and_comments() {
    for (;;) {
      while (!eof() && std::isspace(peek()) != 0) ++pos;
      if (!eof() && peek() == '#') {
        while (!eof() && peek() != '\n') ++pos;
        continue;
      }
      return;
    }
  }

  long parse_int(const char* what) {
    skip_space_and_comments();
    if (eof() || std::isdigit(peek()) == 0) {
      throw ParseError(std::string("expected ") + what, pos);
    }
    long value = 0;
    while (!eof() && std::isdigit(peek()) != 0) {
      value = value * 10 + (peek() - '0');
      if (value > 100'000'000) throw ParseError(std::string(what) + " too large", pos);
      ++pos;
    }
    return value;
  }
};

}  // namespace detail

// Decodes PGM "P2" (ascii) or "P5" (binary) bytes with maxval 255.
// '#' comments are allowed anywhere in the header.
inline Grid read_pgm(std::string_view bytes) {
  detail::PgmParser parser{bytes};
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("not a PGM image: expected magic P2 or P5", 0);
  }
  const bool binary = bytes[1] == '5';
  parser.pos = 2;

  const long width = parser.parse_int("width");
  const long height = parser.parse_int("height");
  if (width < 1 || height < 1) {
    throw ParseError("dimensions must be at least 1x1", parser.pos);
  }
  const long maxval = parser.parse_int("maxval");
  if (maxval != 255) {
    throw ParseError("unsupported maxval " + std::to_string(maxval) + ", expected 255",
                     parser.pos);
  }

  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  // every sample needs at least one payload byte in either format, so an
  // undersized remainder proves truncation before anything is allocated
  if (bytes.size() - parser.pos < count) {
    throw ParseError("truncated pixel data: expected " + std::to_string(count) +
                         " samples, only " + std::to_string(bytes.size() - parser.pos) +
                         " bytes remain",
                     bytes.size());
  }
  std::vector<double> samples(count, 0.0);
  if (binary) {
    if (parser.eof() || std::isspace(parser.peek()) == 0) {
      throw ParseError("expected single whitespace before binary samples", parser.pos);
    }
    ++parser.pos;
    if (bytes.size() - parser.pos < count) {
      throw ParseError("truncated pixel data: expected " + std::to_string(count) +
                           " bytes, found " + std::to_string(bytes.size() - parser.pos),
                       bytes.size());
    }
    for (std::size_t i = 0; i < count; ++i) {
      samples[i] = static_cast<double>(static_cast<unsigned char>(bytes[parser.pos + i]));
    }
    parser.pos += count;
    if (parser.pos != bytes.size()) {
      throw ParseError("trailing data after pixel samples", parser.pos);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const long v = parser.parse_int("sample");
      if (v > 255) throw ParseError("sample exceeds maxval 255", parser.pos);
      samples[i] = static_cast<double>(v);
    }
    parser.skip_space_and_comments();
    if (!parser.eof()) throw ParseError("trailing data after pixel samples", parser.pos);
  }
  return Grid(static_cast<int>(width), static_cast<int>(height), std::move(samples));
}

// Canonical encoding: header "P2\n<w> <h>\n255\n" (or P5), ascii samples one
// image row per line. Levels are rounded to the nearest integer.
inline std::string write_pgm(const Grid& grid, bool binary = true) {
  std::vector<int> samples(grid.pixel_count(), 0);
  for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
    const double g = grid.values()[i];
    const long long v = std::isfinite(g) ? std::llround(g) : -1;
    if (v < 0 || v > 255) {
      throw EncodeError("write_pgm: sample " + detail::format_number("%g", g) +
                        " rounds outside [0, 255]");
    }
    samples[i] = static_cast<int>(v);
  }

  std::string out = binary ? "P5\n" : "P2\n";
  out += std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n255\n";
  if (binary) {
    for (int s : samples) out.push_back(static_cast<char>(static_cast<unsigned char>(s)));
  } else {
    for (int y = 0; y < grid.height(); ++y) {
      for (int x = 0; x < grid.width(); ++x) {
        if (x > 0) out.push_back(' ');
        out += std::to_string(samples[grid.index(x, y)]);
      }
      out.push_back('\n');
    }
  }
  return out;
}

inline Grid read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_pgm(bytes);
}

inline void write_pgm_file(const Grid& grid, const std::filesystem::path& path,
                           bool binary = true) {
  const std::string bytes = write_pgm(grid, binary);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// White for positive sign, black for negative, gray for undecided.
inline Grid render_sign_map(const SignMap& signs) {
  Grid image(signs.width(), signs.height(), 0.0);
  for (std::size_t i = 0; i < signs.pixel_count(); ++i) {
    const int s = signs.values()[i];
    image.values()[i] = s > 0 ? 255.0 : (s < 0 ? 0.0 : 128.0);
  }
  return image;
}

// Spreads region ids evenly over [0, 255]; past 256 regions the levels
// repeat cyclically (rendering only, ids stay authoritative in the LabelMap).
inline Grid render_labels(const LabelMap& labels) {
  if (labels.region_count < 1) {
    throw std::invalid_argument("render_labels: need at least one region");
  }
  const int distinct = labels.region_count < 256 ? labels.region_count : 256;
  const double divisor = distinct > 1 ? static_cast<double>(distinct - 1) : 1.0;
  Grid image(labels.labels.width(), labels.labels.height(), 0.0);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    const std::int32_t k = labels.labels.values()[i] % 256;
    image.values()[i] = static_cast<double>(std::llround(k * 255.0 / divisor));
  }
  return image;
}

// One row per pixel, row-major, z printed with 9 significant digits.
inline std::string export_heightmap_csv(const HeightField& heights) {
  std::string out = "x,y,z\n";
  for (int y = 0; y < heights.height(); ++y) {
    for (int x = 0; x < heights.width(); ++x) {
      out += std::to_string(x) + "," + std::to_string(y) + "," +
             detail::format_number("%.9g", heights(x, y)) + "\n";
    }
  }
  return out;
}

// Wavefront OBJ over the pixel lattice: one vertex per pixel, two triangles
// per cell. Vertex indices are 1-based and row-major.
inline std::string export_mesh_obj(const HeightField& heights, double z_scale = 1.0) {
  const int w = heights.width();
  const int h = heights.height();
  if (w < 2 || h < 2) {
    throw std::invalid_argument("export_mesh_obj: need at least a 2x2 field, got " +
                                std::to_string(w) + "x" + std::to_string(h));
  }
  if (!(z_scale > 0.0)) {
    throw std::invalid_argument("export_mesh_obj: z_scale must be positive");
  }
  std::string out;
  out.reserve(heights.pixel_count() * 16);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out += "v " + std::to_string(x) + " " + std::to_string(y) + " " +
             detail::format_number("%.9g", heights(x, y) * z_scale) + "\n";
    }
  }
  const auto vertex = [w](int x, int y) { return y * w + x + 1; };
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      out += "f " + std::to_string(vertex(x, y)) + " " + std::to_string(vertex(x + 1, y)) +
             " " + std::to_string(vertex(x, y + 1)) + "\n";
      out += "f " + std::to_string(vertex(x + 1, y)) + " " +
             std::to_string(vertex(x + 1, y + 1)) + " " + std::to_string(vertex(x, y + 1)) +
             "\n";
    }
  }
  return out;
}

// avg_abs_dz is printed with 17 significant digits so parsing it back
// reproduces the exact double.
inline std::string write_convergence_csv(const ConvergenceTrace& trace) {
  std::string out = "iteration,avg_abs_dz\n";
  for (const TracePoint& point : trace) {
    out += std::to_string(point.iteration) + "," +
           detail::format_number("%.17g", point.avg_abs_dz) + "\n";
  }
  return out;
}

inline std::string write_merge_plan_csv(const MergePlan& plan) {
  std::string out = "survivor,absorbed,mean_diff\n";
  for (const MergeEvent& event : plan) {
    out += std::to_string(event.survivor) + "," + std::to_string(event.absorbed) + "," +
           detail::format_number("%.17g", event.mean_diff) + "\n";
  }
  return out;
}

inline std::string write_labels_csv(const LabelMap& labels) {
  std::string out = "x,y,label\n";
  for (int y = 0; y < labels.labels.height(); ++y) {
    for (int x = 0; x < labels.labels.width(); ++x) {
      out += std::to_string(x) + "," + std::to_string(y) + "," +
             std::to_string(labels.labels(x, y)) + "\n";
    }
  }
  return out;
}

inline void write_text_file(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

}  // namespace elasticmesh

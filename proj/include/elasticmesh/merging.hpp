#pragma once

#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "elasticmesh/field.hpp"
#include "elasticmesh/segmentation.hpp"

namespace elasticmesh {

// Symmetric boolean flags a_ij ("are regions i and j adjacent"), diagonal
// pinned to false.
class AdjacencyMatrix {
 public:
  explicit AdjacencyMatrix(std::int32_t n)
      : n_(n), flags_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {
    if (n < 0) throw std::invalid_argument("AdjacencyMatrix: negative size");
  }

  std::int32_t size() const { return n_; }

  bool at(std::int32_t i, std::int32_t j) const {
    check(i);
    check(j);
    return flags_[index(i, j)] != 0;
  }

  void set(std::int32_t i, std::int32_t j, bool adjacent) {
    check(i);
    check(j);
    if (i == j) throw std::invalid_argument("AdjacencyMatrix: diagonal must stay false");
    flags_[index(i, j)] = flags_[index(j, i)] = adjacent ? 1 : 0;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  std::size_t index(std::int32_t i, std::int32_t j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(j);
  }
  void check(std::int32_t i) const {
    if (i < 0 || i >= n_) {
      throw std::out_of_range("AdjacencyMatrix: index " + std::to_string(i) +
                              " outside [0, " + std::to_string(n_) + ")");
    }
  }

  std::int32_t n_ = 0;
  std::vector<std::uint8_t> flags_;
};

// One raster scan over horizontal and vertical neighbour pairs.
inline AdjacencyMatrix build_adjacency(const LabelMap& labels) {
  const int w = labels.labels.width();
  const int h = labels.labels.height();
  AdjacencyMatrix matrix(labels.region_count);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::int32_t a = labels.labels(x, y);
      if (x + 1 < w) {
        const std::int32_t b = labels.labels(x + 1, y);
        if (a != b) matrix.set(a, b, true);
      }
      if (y + 1 < h) {
        const std::int32_t b = labels.labels(x, y + 1);
        if (a != b) matrix.set(a, b, true);
      }
    }
  }
  return matrix;
}

struct MergeEvent {
  std::int32_t survivor = 0;
  std::int32_t absorbed = 0;
  double mean_diff = 0.0;  // |mean difference| of the pair when it merged
};

using MergePlan = std::vector<MergeEvent>;

struct MergeResult {
  LabelMap labels;
  MergePlan plan;
};

namespace detail {

// Candidate pair with the region versions it was priced under; stale entries
// are dropped when popped. Produces exactly the rescan-greedy order because
// fresh entries always carry current means and ties order by (diff, i, j).
struct MergeCandidate {
  double diff;
  std::int32_t i, j;
  std::uint32_t version_i, version_j;
};

struct MergeCandidateAfter {
  bool operator()(const MergeCandidate& a, const MergeCandidate& b) const {
    return std::tie(a.diff, a.i, a.j) > std::tie(b.diff, b.i, b.j);
  }
};

}  // namespace detail

// Greedily merges the adjacent pair with the least mean-greyscale difference
// until `target` regions remain. Ties resolve to the lexicographically
// smallest (i, j) id pair and the smaller id survives. Means are recomputed
// (pixel-weighted) after every merge.
inline MergeResult merge_to_count(const LabelMap& labels, const Grid& grid,
                                  std::int32_t target) {
  require_same_size(labels.labels, grid, "merge_to_count");
  const std::int32_t n = labels.region_count;
  if (target < 1) {
    throw std::invalid_argument("merge_to_count: target must be at least 1");
  }
  if (target > n) {
    throw std::invalid_argument("merge_to_count: target " + std::to_string(target) +
                                " exceeds current region count " + std::to_string(n));
  }

  std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  for (std::size_t p = 0; p < grid.pixel_count(); ++p) {
    const std::int32_t r = labels.labels.values()[p];
    if (r < 0 || r >= n) {
      throw std::invalid_argument("merge_to_count: label out of range");
    }
    sums[static_cast<std::size_t>(r)] += grid.values()[p];
    ++counts[static_cast<std::size_t>(r)];
  }
  const auto mean = [&](std::int32_t r) {
    return sums[static_cast<std::size_t>(r)] /
           static_cast<double>(counts[static_cast<std::size_t>(r)]);
  };

  AdjacencyMatrix adjacency = build_adjacency(labels);
  std::vector<std::uint8_t> alive(static_cast<std::size_t>(n), 1);
  std::vector<std::uint32_t> version(static_cast<std::size_t>(n), 0);
  std::vector<std::int32_t> merged_into(static_cast<std::size_t>(n));
  for (std::int32_t r = 0; r < n; ++r) merged_into[static_cast<std::size_t>(r)] = r;

  std::priority_queue<detail::MergeCandidate, std::vector<detail::MergeCandidate>,
                      detail::MergeCandidateAfter>
      candidates;
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t j = i + 1; j < n; ++j) {
      if (adjacency.at(i, j)) {
        candidates.push({std::abs(mean(i) - mean(j)), i, j, version[i], version[j]});
      }
    }
  }

  MergePlan plan;
  std::int32_t remaining = n;
  while (remaining > target) {
    if (candidates.empty()) {
      throw std::logic_error("merge_to_count: no adjacent pair left to merge");
    }
    const detail::MergeCandidate top = candidates.top();
    candidates.pop();
    const auto i = static_cast<std::size_t>(top.i);
    const auto j = static_cast<std::size_t>(top.j);
    if (!alive[i] || !alive[j] || version[i] != top.version_i ||
        version[j] != top.version_j) {
      continue;
    }

    plan.push_back({top.i, top.j, top.diff});
    sums[i] += sums[j];
    counts[i] += counts[j];
    alive[j] = 0;
    merged_into[j] = top.i;
    for (std::int32_t x = 0; x < n; ++x) {
      if (x == top.i || x == top.j) continue;
      if (adjacency.at(top.j, x)) {
        adjacency.set(top.i, x, true);
        adjacency.set(top.j, x, false);
      }
    }
    adjacency.set(top.i, top.j, false);
    ++version[i];
    --remaining;
    for (std::int32_t x = 0; x < n; ++x) {
      if (!alive[static_cast<std::size_t>(x)] || x == top.i) continue;
      if (!adjacency.at(top.i, x)) continue;
      const std::int32_t a = std::min(top.i, x);
      const std::int32_t b = std::max(top.i, x);
      candidates.push({std::abs(mean(a) - mean(b)), a, b,
                       version[static_cast<std::size_t>(a)],
                       version[static_cast<std::size_t>(b)]});
    }
  }

  // Resolve each original label to its surviving region, then compact the
  // survivors in ascending id order.
  const auto find_survivor = [&](std::int32_t r) {
    while (merged_into[static_cast<std::size_t>(r)] != r) {
      const std::int32_t parent = merged_into[static_cast<std::size_t>(r)];
      merged_into[static_cast<std::size_t>(r)] =
          merged_into[static_cast<std::size_t>(parent)];
      r = merged_into[static_cast<std::size_t>(r)];
    }
    return r;
  };
  std::vector<std::int32_t> compact(static_cast<std::size_t>(n), -1);
  std::int32_t next = 0;
  for (std::int32_t r = 0; r < n; ++r) {
    if (alive[static_cast<std::size_t>(r)]) compact[static_cast<std::size_t>(r)] = next++;
  }

  MergeResult result{{Field<std::int32_t>(grid.width(), grid.height(), 0), target}, plan};
  for (std::size_t p = 0; p < grid.pixel_count(); ++p) {
    const std::int32_t survivor = find_survivor(labels.labels.values()[p]);
    result.labels.labels.values()[p] = compact[static_cast<std::size_t>(survivor)];
  }
  return result;
}

}  // namespace elasticmesh

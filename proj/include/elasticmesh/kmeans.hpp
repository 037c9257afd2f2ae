#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "elasticmesh/field.hpp"
#include "elasticmesh/segmentation.hpp"

namespace elasticmesh {

struct KMeansResult {
  int k = 0;
  std::vector<double> centroids;  // ascending
  LabelMap assignment;            // per-pixel class index in [0, k)
  int iterations = 0;
  bool converged = false;
  std::vector<double> wcss_history;  // within-cluster sum of squares per iteration
};

// Lloyd's iteration on 1-D intensities. Initial centroids are k evenly
// spaced quantiles of the intensity distribution, nudged onto distinct
// levels when quantiles coincide; the whole procedure is deterministic.
// The seed is reserved for an optional randomized initialization.
inline KMeansResult kmeans_grayscale(const Grid& grid, int k, int max_iter = 100,
                                     [[maybe_unused]] std::uint64_t seed = 0) {
  if (max_iter < 1) throw std::invalid_argument("kmeans_grayscale: max_iter must be positive");
  std::vector<double> sorted(grid.values().begin(), grid.values().end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> levels(sorted);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (k < 1 || k > static_cast<int>(levels.size())) {
    throw std::invalid_argument("kmeans_grayscale: k must be in [1, " +
                                std::to_string(levels.size()) +
                                "] (number of distinct levels), got " + std::to_string(k));
  }

  // quantile picks mapped to distinct-level indices, forced strictly increasing
  std::vector<std::ptrdiff_t> pick(static_cast<std::size_t>(k));
  const std::size_t n = sorted.size();
  for (int c = 0; c < k; ++c) {
    const std::size_t rank = (2 * static_cast<std::size_t>(c) + 1) * n / (2 * static_cast<std::size_t>(k));
    const double value = sorted[std::min(rank, n - 1)];
    pick[static_cast<std::size_t>(c)] =
        std::lower_bound(levels.begin(), levels.end(), value) - levels.begin();
  }
  for (int c = 1; c < k; ++c) {
    pick[c] = std::max(pick[c], pick[c - 1] + 1);
  }
  const auto top = static_cast<std::ptrdiff_t>(levels.size()) - 1;
  pick[static_cast<std::size_t>(k) - 1] = std::min(pick[static_cast<std::size_t>(k) - 1], top);
  for (int c = k - 2; c >= 0; --c) {
    pick[c] = std::min(pick[c], pick[c + 1] - 1);
  }

  KMeansResult result;
  result.k = k;
  result.centroids.resize(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    result.centroids[static_cast<std::size_t>(c)] = levels[static_cast<std::size_t>(pick[c])];
  }
  result.assignment = LabelMap{Field<std::int32_t>(grid.width(), grid.height(), 0), k};

  const auto assign_all = [&](Field<std::int32_t>& out) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
      const double g = grid.values()[i];
      int best = 0;
      double best_d = std::abs(g - result.centroids[0]);
      for (int c = 1; c < k; ++c) {
        const double d = std::abs(g - result.centroids[static_cast<std::size_t>(c)]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      out.values()[i] = best;
      wcss += best_d * best_d;
    }
    return wcss;
  };

  Field<std::int32_t> previous(grid.width(), grid.height(), -1);
  for (int iteration = 1; iteration <= max_iter; ++iteration) {
    result.iterations = iteration;
    result.wcss_history.push_back(assign_all(result.assignment.labels));
    if (result.assignment.labels == previous) {
      result.converged = true;
      break;
    }
    previous = result.assignment.labels;

    std::vector<double> sums(static_cast<std::size_t>(k), 0.0);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
      const auto c = static_cast<std::size_t>(result.assignment.labels.values()[i]);
      sums[c] += grid.values()[i];
      ++counts[c];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (counts[c] > 0) result.centroids[c] = sums[c] / static_cast<double>(counts[c]);
    }
  }

  // restore the exact invariants: ascending centroids, nearest assignment
  std::sort(result.centroids.begin(), result.centroids.end());
  assign_all(result.assignment.labels);
  return result;
}

// Breaks intensity classes into 4-connected spatial components; a class id
// plays the same role a sign does in region clustering.
inline LabelMap split_components(const LabelMap& assignment) {
  return label_components(assignment.labels);
}

}  // namespace elasticmesh

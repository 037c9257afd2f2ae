#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "elasticmesh/merging.hpp"
#include "elasticmesh/segmentation.hpp"

using namespace elasticmesh;

namespace {

// All-pairs pixel scan; quadratic on purpose.
AdjacencyMatrix brute_force_adjacency(const LabelMap& labels) {
  const int w = labels.labels.width();
  const int h = labels.labels.height();
  AdjacencyMatrix matrix(labels.region_count);
  for (int y1 = 0; y1 < h; ++y1) {
    for (int x1 = 0; x1 < w; ++x1) {
      for (int y2 = 0; y2 < h; ++y2) {
        for (int x2 = 0; x2 < w; ++x2) {
          const bool adjacent = std::abs(x1 - x2) + std::abs(y1 - y2) == 1;
          if (!adjacent) continue;
          const std::int32_t a = labels.labels(x1, y1);
          const std::int32_t b = labels.labels(x2, y2);
          if (a != b) matrix.set(a, b, true);
        }
      }
    }
  }
  return matrix;
}

// Greedy oracle that rescans every region pair (and recomputes all means
// from raw pixels) before each merge. Survivor ids follow the same rule as
// the production path: lexicographically smallest (i, j), survivor i.
MergeResult rescan_greedy(const LabelMap& labels, const Grid& grid, std::int32_t target) {
  const std::int32_t n = labels.region_count;
  std::vector<std::int32_t> region_of(labels.labels.values().begin(),
                                      labels.labels.values().end());
  std::set<std::int32_t> alive;
  for (std::int32_t r = 0; r < n; ++r) alive.insert(r);
  MergePlan plan;

  while (static_cast<std::int32_t>(alive.size()) > target) {
    std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < region_of.size(); ++i) {
      sums[static_cast<std::size_t>(region_of[i])] += grid.values()[i];
      ++counts[static_cast<std::size_t>(region_of[i])];
    }
    const int w = grid.width();
    const int h = grid.height();
    AdjacencyMatrix adjacency(n);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::int32_t a = region_of[grid.index(x, y)];
        if (x + 1 < w) {
          const std::int32_t b = region_of[grid.index(x + 1, y)];
          if (a != b) adjacency.set(a, b, true);
        }
        if (y + 1 < h) {
          const std::int32_t b = region_of[grid.index(x, y + 1)];
          if (a != b) adjacency.set(a, b, true);
        }
      }
    }

    bool found = false;
    std::int32_t best_i = 0, best_j = 0;
    double best_diff = 0.0;
    for (std::int32_t i : alive) {
      for (std::int32_t j : alive) {
        if (j <= i || !adjacency.at(i, j)) continue;
        const double mean_i = sums[static_cast<std::size_t>(i)] /
                              static_cast<double>(counts[static_cast<std::size_t>(i)]);
        const double mean_j = sums[static_cast<std::size_t>(j)] /
                              static_cast<double>(counts[static_cast<std::size_t>(j)]);
        const double diff = std::abs(mean_i - mean_j);
        if (!found || diff < best_diff) {
          found = true;
          best_diff = diff;
          best_i = i;
          best_j = j;
        }
      }
    }
    REQUIRE(found);
    plan.push_back({best_i, best_j, best_diff});
    for (auto& r : region_of) {
      if (r == best_j) r = best_i;
    }
    alive.erase(best_j);
  }

  std::vector<std::int32_t> compact(static_cast<std::size_t>(n), -1);
  std::int32_t next = 0;
  for (std::int32_t r : alive) compact[static_cast<std::size_t>(r)] = next++;
  LabelMap out{Field<std::int32_t>(grid.width(), grid.height(), 0), target};
  for (std::size_t i = 0; i < region_of.size(); ++i) {
    out.labels.values()[i] = compact[static_cast<std::size_t>(region_of[i])];
  }
  return {out, plan};
}

// Random partition with a bounded region count plus per-region integer
// greyscale levels; small level alphabet so exact mean ties occur.
struct Instance {
  LabelMap labels;
  Grid grid;
};

Instance random_instance(std::mt19937& rng, int max_regions) {
  std::uniform_int_distribution<int> dim(2, 7);
  std::uniform_int_distribution<int> key(0, 2);
  for (;;) {
    const int w = dim(rng);
    const int h = dim(rng);
    Field<std::int8_t> keys(w, h, 0);
    for (auto& k : keys.values()) k = static_cast<std::int8_t>(key(rng));
    const LabelMap labels = label_components(keys);
    if (labels.region_count < 2 || labels.region_count > max_regions) continue;
    std::uniform_int_distribution<int> level(0, 9);
    std::vector<double> region_level(static_cast<std::size_t>(labels.region_count));
    for (auto& g : region_level) g = 25.0 * level(rng);
    Grid grid(w, h, 0.0);
    for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
      grid.values()[i] = region_level[static_cast<std::size_t>(labels.labels.values()[i])];
    }
    return {labels, grid};
  }
}

}  // namespace

TEST_CASE("adjacency matrix keeps symmetry and a clear diagonal") {
  AdjacencyMatrix matrix(3);
  CHECK(matrix.size() == 3);
  matrix.set(0, 2, true);
  CHECK(matrix.at(0, 2));
  CHECK(matrix.at(2, 0));
  CHECK_FALSE(matrix.at(0, 1));
  CHECK_FALSE(matrix.at(1, 1));
  matrix.set(2, 0, false);
  CHECK_FALSE(matrix.at(0, 2));
  CHECK_THROWS_AS(matrix.set(1, 1, true), std::invalid_argument);
  CHECK_THROWS_AS(matrix.at(3, 0), std::out_of_range);
}

TEST_CASE("two halves are adjacent") {
  Field<std::int8_t> keys(4, 2, 0);
  keys(2, 0) = keys(3, 0) = keys(2, 1) = keys(3, 1) = 1;
  const LabelMap labels = label_components(keys);
  const AdjacencyMatrix matrix = build_adjacency(labels);
  REQUIRE(matrix.size() == 2);
  CHECK(matrix.at(0, 1));
}

TEST_CASE("rectangle in background yields one adjacent pair") {
  Field<std::int8_t> keys(8, 8, 0);
  for (int y = 2; y < 6; ++y) {
    for (int x = 2; x < 6; ++x) keys(x, y) = 1;
  }
  const LabelMap labels = label_components(keys);
  REQUIRE(labels.region_count == 2);
  const AdjacencyMatrix matrix = build_adjacency(labels);
  CHECK(matrix.at(0, 1));
  CHECK_FALSE(matrix.at(0, 0));
  CHECK_FALSE(matrix.at(1, 1));
}

TEST_CASE("adjacency matches the all-pairs oracle") {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> key(0, 3);
  for (int trial = 0; trial < 25; ++trial) {
    Field<std::int8_t> keys(8, 8, 0);
    for (auto& k : keys.values()) k = static_cast<std::int8_t>(key(rng));
    const LabelMap labels = label_components(keys);
    const AdjacencyMatrix got = build_adjacency(labels);
    const AdjacencyMatrix expected = brute_force_adjacency(labels);
    REQUIRE(got == expected);
  }
}

TEST_CASE("chain of four regions merges closest means first") {
  // columns 0..3 are separate regions with means 10, 12, 100, 105
  const Grid grid(4, 2, std::vector<double>{10, 12, 100, 105, 10, 12, 100, 105});
  Field<std::int32_t> raw(4, 2, 0);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) raw(x, y) = x;
  }
  const LabelMap labels{raw, 4};

  const MergeResult result = merge_to_count(labels, grid, 2);
  REQUIRE(result.plan.size() == 2);
  CHECK(result.plan[0].survivor == 0);
  CHECK(result.plan[0].absorbed == 1);
  CHECK(result.plan[0].mean_diff == Catch::Approx(2.0));
  CHECK(result.plan[1].survivor == 2);
  CHECK(result.plan[1].absorbed == 3);
  CHECK(result.plan[1].mean_diff == Catch::Approx(5.0));

  REQUIRE(result.labels.region_count == 2);
  std::vector<double> sums(2, 0.0);
  std::vector<int> counts(2, 0);
  for (std::size_t i = 0; i < grid.pixel_count(); ++i) {
    const auto r = static_cast<std::size_t>(result.labels.labels.values()[i]);
    sums[r] += grid.values()[i];
    ++counts[r];
  }
  CHECK(sums[0] / counts[0] == Catch::Approx(11.0));
  CHECK(sums[1] / counts[1] == Catch::Approx(102.5));
}

TEST_CASE("merging to the current count is the identity") {
  Field<std::int8_t> keys(5, 3, 0);
  keys(4, 0) = 1;
  const LabelMap labels = label_components(keys);
  const Grid grid(5, 3, 100.0);
  const MergeResult result = merge_to_count(labels, grid, labels.region_count);
  CHECK(result.plan.empty());
  CHECK(result.labels == labels);
}

TEST_CASE("merge target is validated") {
  const LabelMap labels{Field<std::int32_t>(2, 2, 0), 1};
  const Grid grid(2, 2, 9.0);
  CHECK_THROWS_AS(merge_to_count(labels, grid, 0), std::invalid_argument);
  CHECK_THROWS_AS(merge_to_count(labels, grid, 2), std::invalid_argument);
  CHECK_THROWS_AS(merge_to_count(labels, Grid(3, 2, 9.0), 1), std::invalid_argument);
}

TEST_CASE("ties pick the lexicographically smallest pair") {
  // three columns, means 50, 50, 50: pairs (0,1) and (1,2) tie at diff 0
  const Grid grid(3, 1, std::vector<double>{50, 50, 50});
  Field<std::int32_t> raw(3, 1, 0);
  raw(1, 0) = 1;
  raw(2, 0) = 2;
  const LabelMap labels{raw, 3};
  const MergeResult result = merge_to_count(labels, grid, 2);
  REQUIRE(result.plan.size() == 1);
  CHECK(result.plan[0].survivor == 0);
  CHECK(result.plan[0].absorbed == 1);
  CHECK(result.plan[0].mean_diff == 0.0);
}

TEST_CASE("merging matches the rescan-greedy oracle") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 120; ++trial) {
    const Instance instance = random_instance(rng, 8);
    std::uniform_int_distribution<int> pick(1, instance.labels.region_count);
    const std::int32_t target = pick(rng);
    const MergeResult got = merge_to_count(instance.labels, instance.grid, target);
    const MergeResult expected = rescan_greedy(instance.labels, instance.grid, target);
    REQUIRE(got.labels.region_count == target);
    REQUIRE(got.labels == expected.labels);
    REQUIRE(got.plan.size() == expected.plan.size());
    for (std::size_t e = 0; e < got.plan.size(); ++e) {
      REQUIRE(got.plan[e].survivor == expected.plan[e].survivor);
      REQUIRE(got.plan[e].absorbed == expected.plan[e].absorbed);
      REQUIRE(got.plan[e].mean_diff == expected.plan[e].mean_diff);
    }
  }
}

TEST_CASE("merges conserve pixels and reach a single region") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance instance = random_instance(rng, 8);
    const MergeResult result = merge_to_count(instance.labels, instance.grid, 1);
    CHECK(static_cast<std::int32_t>(result.plan.size()) ==
          instance.labels.region_count - 1);
    CHECK(result.labels.labels.pixel_count() == instance.grid.pixel_count());
    for (auto label : result.labels.labels.values()) CHECK(label == 0);
  }
}

TEST_CASE("merging matches the oracle on a many-region instance") {
  // blocky integer scene with speckle: dozens of regions, frequent mean ties
  std::mt19937 rng(271828);
  std::uniform_int_distribution<int> noise(0, 2);
  const int w = 32, h = 32;
  Grid grid(w, h, 0.0);
  Field<std::int8_t> keys(w, h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int level = (x / 7 + y / 5) % 3 + noise(rng);
      keys(x, y) = static_cast<std::int8_t>(level);
      grid(x, y) = 40.0 * level;
    }
  }
  const LabelMap labels = label_components(keys);
  REQUIRE(labels.region_count > 20);
  for (const std::int32_t target : {labels.region_count / 2, 10, 3, 1}) {
    const MergeResult got = merge_to_count(labels, grid, target);
    const MergeResult expected = rescan_greedy(labels, grid, target);
    REQUIRE(got.labels == expected.labels);
    REQUIRE(got.plan.size() == expected.plan.size());
    for (std::size_t e = 0; e < got.plan.size(); ++e) {
      REQUIRE(got.plan[e].survivor == expected.plan[e].survivor);
      REQUIRE(got.plan[e].absorbed == expected.plan[e].absorbed);
    }
  }
}

TEST_CASE("plans for nested targets are prefixes of each other") {
  std::mt19937 rng(63);
  const Instance instance = random_instance(rng, 8);
  const std::int32_t n = instance.labels.region_count;
  const MergeResult full = merge_to_count(instance.labels, instance.grid, 1);
  for (std::int32_t target = n; target >= 1; --target) {
    const MergeResult partial = merge_to_count(instance.labels, instance.grid, target);
    REQUIRE(partial.plan.size() == static_cast<std::size_t>(n - target));
    for (std::size_t e = 0; e < partial.plan.size(); ++e) {
      REQUIRE(partial.plan[e].survivor == full.plan[e].survivor);
      REQUIRE(partial.plan[e].absorbed == full.plan[e].absorbed);
    }
    // the merged map must still be a sound partition with sound adjacency
    const AdjacencyMatrix recomputed = build_adjacency(partial.labels);
    const AdjacencyMatrix brute = brute_force_adjacency(partial.labels);
    REQUIRE(recomputed == brute);
  }
}

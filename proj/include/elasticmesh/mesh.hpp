#pragma once

#include <algorithm>
#include <barrier>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "elasticmesh/errors.hpp"
#include "elasticmesh/field.hpp"

namespace elasticmesh {

namespace detail {

inline std::string format_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

struct StabilityCheck {
  bool ok = false;
  double product = 0.0;  // k3 * k2
  double bound = 0.0;
  std::string message;
};

// The synchronous update map has eigenvalues 1 - k3*k2*lambda with lambda in
// [0, 8] on a 4-connected grid (graph Laplacian, max degree 4), so every mode
// contracts only when k3*k2 < 0.25. Beyond that the checkerboard mode diverges.
inline StabilityCheck check_stability(double k2, double k3) {
  StabilityCheck check;
  check.product = k3 * k2;
  check.bound = 0.25;
  check.ok = check.product < check.bound;
  if (check.ok) {
    check.message = "ok: k3*k2 = " + detail::format_g(check.product) + " < 0.25";
  } else {
    check.message = "rejected: k3*k2 = " + detail::format_g(check.product) +
                    " >= 0.25, the synchronous update bound on a 4-connected grid "
                    "(update eigenvalues 1 - k3*k2*lambda, lambda in [0, 8])";
  }
  return check;
}

// Coefficients and stop rule for the mesh relaxation.
struct SimParams {
  double k1 = 1.0;          // repulsion, height units per greyscale level
  double k2 = 1.0;          // elasticity
  double k3 = 0.1;          // step gain
  double epsilon = 1e-4;    // stop threshold on average |dz|
  int max_iterations = 10000;
  bool allow_unstable = false;   // bypasses the k3*k2 < 0.25 guard, not positivity
  double blowup_threshold = 1e12;  // avg |dz| beyond this is treated as divergence

  SimParams() = default;

  SimParams(double k1, double k2, double k3, double epsilon = 1e-4,
            int max_iterations = 10000, bool allow_unstable = false)
      : k1(k1), k2(k2), k3(k3), epsilon(epsilon),
        max_iterations(max_iterations), allow_unstable(allow_unstable) {
    validate();
  }

  void validate() const {
    if (!(k1 > 0.0)) throw std::invalid_argument("SimParams: k1 must be positive");
    if (!(k2 > 0.0)) throw std::invalid_argument("SimParams: k2 must be positive");
    if (!(k3 > 0.0)) throw std::invalid_argument("SimParams: k3 must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("SimParams: epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("SimParams: max_iterations must be at least 1");
    if (!(blowup_threshold > 0.0)) throw std::invalid_argument("SimParams: blowup_threshold must be positive");
    if (!allow_unstable) {
      StabilityCheck check = check_stability(k2, k3);
      if (!check.ok) throw std::invalid_argument("SimParams: " + check.message);
    }
  }
};

inline StabilityCheck check_stability(const SimParams& params) {
  return check_stability(params.k2, params.k3);
}

// Force a neighbour with greyscale g_a applies along z to a pixel with
// greyscale g: positive pushes the brighter pixel up.
inline double repulsive_force(double g, double g_a, double k1) {
  return k1 * (g - g_a);
}

// Restoring force pulling a pixel at height z toward its neighbour at z_a.
inline double elastic_force(double z, double z_a, double k2) {
  return k2 * (z_a - z);
}

struct ForceSample {
  double repulsive = 0.0;  // sum of repulsive terms over in-bounds neighbours
  double elastic = 0.0;    // sum of elastic terms
  double net = 0.0;        // repulsive + elastic
  double delta_z = 0.0;    // k3 * net
};

namespace detail {

// Neighbour order is upper, lower, left, right everywhere; step() and
// net_force() must accumulate identically so their results agree bit for bit.
inline ForceSample force_at(const Grid& grid, const HeightField& heights,
                            int x, int y, const SimParams& params) {
  static constexpr int kDx[4] = {0, 0, -1, 1};
  static constexpr int kDy[4] = {-1, 1, 0, 0};
  const double g = grid(x, y);
  const double z = heights(x, y);
  ForceSample sample;
  for (int n = 0; n < 4; ++n) {
    const int nx = x + kDx[n];
    const int ny = y + kDy[n];
    if (!grid.in_bounds(nx, ny)) continue;
    sample.repulsive += repulsive_force(g, grid(nx, ny), params.k1);
    sample.elastic += elastic_force(z, heights(nx, ny), params.k2);
  }
  sample.net = sample.repulsive + sample.elastic;
  sample.delta_z = params.k3 * sample.net;
  return sample;
}

// Writes one row of updated heights, returns the row's sum of |dz|
// accumulated left to right.
inline double step_row(const Grid& grid, const HeightField& heights,
                       HeightField& out, int y, const SimParams& params) {
  double abs_dz_sum = 0.0;
  for (int x = 0; x < grid.width(); ++x) {
    const double dz = force_at(grid, heights, x, y, params).delta_z;
    out(x, y) = heights(x, y) + dz;
    abs_dz_sum += std::abs(dz);
  }
  return abs_dz_sum;
}

// Row sums are always combined top to bottom, so the reduction does not
// depend on how rows were split across workers.
inline double step_into(const Grid& grid, const HeightField& heights,
                        HeightField& out, const SimParams& params, int workers) {
  const int h = grid.height();
  std::vector<double> row_sums(static_cast<std::size_t>(h), 0.0);

  const int n_workers = std::min(workers < 1 ? 1 : workers, h);
  if (n_workers <= 1) {
    for (int y = 0; y < h; ++y) {
      row_sums[static_cast<std::size_t>(y)] = step_row(grid, heights, out, y, params);
    }
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      const int y_begin = static_cast<int>(static_cast<long long>(h) * w / n_workers);
      const int y_end = static_cast<int>(static_cast<long long>(h) * (w + 1) / n_workers);
      pool.emplace_back([&, y_begin, y_end] {
        for (int y = y_begin; y < y_end; ++y) {
          row_sums[static_cast<std::size_t>(y)] = step_row(grid, heights, out, y, params);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  double total = 0.0;
  for (double s : row_sums) total += s;
  const double avg = total / static_cast<double>(grid.pixel_count());
  if (!std::isfinite(avg)) {
    throw InstabilityError(
        "step produced non-finite heights; parameters are unstable (k3*k2 = " +
        detail::format_g(params.k3 * params.k2) + ", stability bound 0.25)");
  }
  return avg;
}

}  // namespace detail

// Net force on pixel (x, y): repulsive and elastic contributions summed over
// the in-bounds 4-connected neighbours. Border pixels simply have fewer terms.
inline ForceSample net_force(const Grid& grid, const HeightField& heights,
                             int x, int y, const SimParams& params) {
  params.validate();
  require_same_size(grid, heights, "net_force");
  if (!grid.in_bounds(x, y)) {
    throw std::out_of_range("net_force: pixel (" + std::to_string(x) + ", " +
                            std::to_string(y) + ") outside " +
                            std::to_string(grid.width()) + "x" +
                            std::to_string(grid.height()));
  }
  return detail::force_at(grid, heights, x, y, params);
}

struct StepResult {
  HeightField heights;
  double avg_abs_dz = 0.0;
};

// One synchronous update: every delta is computed against the incoming
// heights, then all are applied at once.
inline StepResult step(const Grid& grid, const HeightField& heights,
                       const SimParams& params, int workers = 1) {
  params.validate();
  require_same_size(grid, heights, "step");
  StepResult result{HeightField(grid.width(), grid.height(), 0.0), 0.0};
  result.avg_abs_dz = detail::step_into(grid, heights, result.heights, params, workers);
  return result;
}

struct TracePoint {
  int iteration = 0;       // 1-based
  double avg_abs_dz = 0.0;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

using ConvergenceTrace = std::vector<TracePoint>;

struct SimulationResult {
  HeightField heights;
  ConvergenceTrace trace;
  int iterations_run = 0;
  bool converged = false;
  std::map<int, HeightField> snapshots;  // keyed by iteration number
};

namespace detail {

inline std::string diverged_message(int iteration, double avg, const SimParams& params) {
  return "simulation diverged at iteration " + std::to_string(iteration) +
         " (avg |dz| = " + format_g(avg) + "); k3*k2 = " +
         format_g(params.k3 * params.k2) + ", stability bound 0.25";
}

}  // namespace detail

// Runs the relaxation from z = 0 until avg |dz| drops below epsilon or the
// iteration cap is hit. Snapshot copies of the heights are kept for each
// requested iteration number that is actually reached. With more than one
// worker a pooled barrier-synchronized loop splits rows across threads; the
// fixed reduction order keeps results identical for any worker count.
inline SimulationResult simulate(const Grid& grid, const SimParams& params,
                                 const std::set<int>& snapshot_iterations = {},
                                 int workers = 1) {
  params.validate();
  require_grid_levels(grid);

  const int h = grid.height();
  const int n_workers = std::clamp(workers, 1, h);

  HeightField current(grid.width(), h, 0.0);
  HeightField next(grid.width(), h, 0.0);
  SimulationResult result;

  if (n_workers == 1) {
    for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
      const double avg = detail::step_into(grid, current, next, params, 1);
      std::swap(current, next);
      result.trace.push_back({iteration, avg});
      result.iterations_run = iteration;
      if (avg > params.blowup_threshold) {
        throw InstabilityError(detail::diverged_message(iteration, avg, params));
      }
      if (snapshot_iterations.count(iteration) != 0) {
        result.snapshots.emplace(iteration, current);
      }
      if (avg < params.epsilon) {
        result.converged = true;
        break;
      }
    }
    result.heights = std::move(current);
    return result;
  }

  std::vector<double> row_sums(static_cast<std::size_t>(h), 0.0);
  struct Control {
    int iteration = 0;
    double avg = 0.0;
    bool stop = false;
    bool non_finite = false;
    bool diverged = false;
  } control;

  auto on_iteration_done = [&]() noexcept {
    double total = 0.0;
    for (double s : row_sums) total += s;
    const double avg = total / static_cast<double>(grid.pixel_count());
    std::swap(current, next);
    ++control.iteration;
    control.avg = avg;
    result.trace.push_back({control.iteration, avg});
    result.iterations_run = control.iteration;
    if (!std::isfinite(avg)) {
      control.non_finite = true;
      control.stop = true;
      return;
    }
    if (avg > params.blowup_threshold) {
      control.diverged = true;
      control.stop = true;
      return;
    }
    if (snapshot_iterations.count(control.iteration) != 0) {
      result.snapshots.emplace(control.iteration, current);
    }
    if (avg < params.epsilon) {
      result.converged = true;
      control.stop = true;
    } else if (control.iteration >= params.max_iterations) {
      control.stop = true;
    }
  };
  std::barrier sync(n_workers, on_iteration_done);

  const auto worker_loop = [&](int w) {
    const int y_begin = static_cast<int>(static_cast<long long>(h) * w / n_workers);
    const int y_end = static_cast<int>(static_cast<long long>(h) * (w + 1) / n_workers);
    for (;;) {
      for (int y = y_begin; y < y_end; ++y) {
        row_sums[static_cast<std::size_t>(y)] =
            detail::step_row(grid, current, next, y, params);
      }
      sync.arrive_and_wait();
      if (control.stop) break;
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers) - 1);
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker_loop, w);
  worker_loop(0);
  for (auto& t : pool) t.join();

  if (control.non_finite) {
    throw InstabilityError(
        "step produced non-finite heights; parameters are unstable (k3*k2 = " +
        detail::format_g(params.k3 * params.k2) + ", stability bound 0.25)");
  }
  if (control.diverged) {
    throw InstabilityError(detail::diverged_message(control.iteration, control.avg, params));
  }
  result.heights = std::move(current);
  return result;
}

// Max |f_net| over all pixels; zero exactly at the balance state.
inline double fixed_point_residual(const Grid& grid, const HeightField& heights,
                                   const SimParams& params) {
  params.validate();
  require_same_size(grid, heights, "fixed_point_residual");
  double worst = 0.0;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      worst = std::max(worst, std::abs(detail::force_at(grid, heights, x, y, params).net));
    }
  }
  return worst;
}

}  // namespace elasticmesh

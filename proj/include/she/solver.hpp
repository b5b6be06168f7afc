#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "she/harmonics.hpp"
#include "she/types.hpp"

namespace she {

/// Particle swarm settings. Defaults: swarm 50, 500 iterations, inertia
/// decayed linearly 0.9 -> 0.4, cognitive = social = 2.0, early-stop
/// tolerance 1e-6. Every run is fully determined by `seed`.
struct PsoParams {
  int swarm_size = 50;
  int max_iters = 500;
  double inertia = 0.9;
  double inertia_final = 0.4;
  double cognitive = 2.0;
  double social = 2.0;
  double tolerance = 1e-6;
  std::uint64_t seed = 42;
};

/// Outcome of one solve: the angles, how well the fundamental tracks the
/// target, the normalized residual of each targeted harmonic, and solver
/// diagnostics (iteration count, seed, per-iteration best cost).
struct SolveResult {
  AngleSet angles;
  double target_m;
  double achieved_pu;
  std::map<int, double> residuals;
  double cost;
  int iterations;
  std::uint64_t seed;
  std::vector<double> best_cost_history;
};

namespace detail {

inline void validate_pso_params(const PsoParams& p) {
  if (p.swarm_size < 2) throw DomainError("swarm_size must be >= 2");
  if (p.max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (!(p.inertia >= p.inertia_final) || !(p.inertia_final >= 0.0))
    throw DomainError("require inertia >= inertia_final >= 0");
  if (!(p.cognitive > 0.0) || !(p.social > 0.0))
    throw DomainError("cognitive and social weights must be positive");
  if (!(p.tolerance >= 0.0)) throw DomainError("tolerance must be >= 0");
}

/// The odd harmonics a K-source inverter targets for elimination: 3, 5, ...
/// up to order 2K-1 (K-1 of them; the fundamental is tracked, not removed).
inline std::vector<int> eliminated_orders(int n_sources) {
  std::vector<int> orders;
  for (int n = 3; n <= 2 * n_sources - 1; n += 2) orders.push_back(n);
  return orders;
}

/// Cost of a raw position vector (angle order does not matter: the cost is
/// symmetric under permutation). Shared by the swarm and the grid oracle.
inline double position_cost(std::span<const double> degrees, double m, int n_sources) {
  const double fund = 4.0 / (kPi * n_sources) * cos_sum(degrees, 1);
  double c = std::abs(m - fund);
  for (int n = 3; n <= 2 * n_sources - 1; n += 2)
    c += 4.0 / (n * kPi * n_sources) * std::abs(cos_sum(degrees, n));
  return c;
}

/// Canonical uniform draw in [0, 1); identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Clamp into [0, 90], sort, and resolve duplicates so the vector satisfies
/// the AngleSet rules (equal values are only legal at 90).
inline std::vector<double> canonical_angles(std::vector<double> pos) {
  for (double& x : pos) x = std::clamp(x, 0.0, 90.0);
  std::sort(pos.begin(), pos.end());
  for (std::size_t i = 1; i < pos.size(); ++i) {
    if (pos[i] != 90.0 && pos[i] <= pos[i - 1])
      pos[i] = std::nextafter(pos[i - 1], 91.0);
  }
  return pos;
}

inline SolveResult make_result(std::vector<double> position, double m,
                               const InverterConfig& config, int iterations,
                               std::uint64_t seed, std::vector<double> history) {
  AngleSet angles(canonical_angles(std::move(position)));
  const double achieved = fundamental_pu(angles, config);
  std::map<int, double> residuals;
  double cost = std::abs(m - achieved);
  for (int n : eliminated_orders(config.n_sources)) {
    const double r =
        4.0 / (n * kPi * config.n_sources) * std::abs(cos_sum(angles.degrees(), n));
    residuals[n] = r;
    cost += r;
  }
  return SolveResult{std::move(angles), m,    achieved,           residuals,
                     cost,              iterations, seed, std::move(history)};
}

}  // namespace detail

/// Cost being minimized: |m - fundamental_pu| plus the normalized magnitude
/// of every targeted harmonic. Zero exactly when the fundamental matches and
/// all targeted harmonics vanish.
inline double cost(const AngleSet& angles, const ModulationIndex& m,
                   const InverterConfig& config) {
  detail::require_pairing(angles, config);
  return detail::position_cost(angles.degrees(), m.value(), config.n_sources);
}

/**
 * Minimize the switching-angle cost with particle swarm optimization.
 *
 * Positions are clamped to [0, 90]; ordering is irrelevant during the search
 * (the cost is permutation-symmetric) and enforced on the returned result.
 * Three restarts with seeds derived from params.seed guard against
 * stagnation; the best particle overall wins and the search stops early once
 * the cost drops below params.tolerance. Fully deterministic for a given
 * (m, config, params).
 */
inline SolveResult solve(const ModulationIndex& m, const InverterConfig& config,
                         const PsoParams& params = {}) {
  detail::validate_pso_params(params);
  constexpr int kRestarts = 3;
  const int dim = config.n_sources;
  const double target = m.value();

  std::vector<double> global_best_pos;
  double global_best = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  int total_iters = 0;

  for (int restart = 0; restart < kRestarts && global_best >= params.tolerance;
       ++restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed),
                      static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(restart)};
    std::mt19937_64 rng(seq);

    std::vector<std::vector<double>> pos(params.swarm_size, std::vector<double>(dim));
    std::vector<std::vector<double>> vel = pos;
    std::vector<std::vector<double>> best_pos = pos;
    std::vector<double> best_cost(params.swarm_size);

    int swarm_best = 0;
    for (int i = 0; i < params.swarm_size; ++i) {
      for (int d = 0; d < dim; ++d) pos[i][d] = 90.0 * detail::uniform01(rng);
      for (int d = 0; d < dim; ++d) vel[i][d] = 90.0 * (detail::uniform01(rng) - 0.5);
      best_pos[i] = pos[i];
      best_cost[i] = detail::position_cost(pos[i], target, dim);
      if (best_cost[i] < best_cost[swarm_best]) swarm_best = i;
    }
    if (best_cost[swarm_best] < global_best) {
      global_best = best_cost[swarm_best];
      global_best_pos = best_pos[swarm_best];
    }

    const double denom = params.max_iters > 1 ? params.max_iters - 1 : 1;
    for (int iter = 0; iter < params.max_iters; ++iter) {
      const double w =
          params.inertia + (params.inertia_final - params.inertia) * iter / denom;
      for (int i = 0; i < params.swarm_size; ++i) {
        for (int d = 0; d < dim; ++d) {
          const double r1 = detail::uniform01(rng);
          const double r2 = detail::uniform01(rng);
          double v = w * vel[i][d] +
                     params.cognitive * r1 * (best_pos[i][d] - pos[i][d]) +
                     params.social * r2 * (best_pos[swarm_best][d] - pos[i][d]);
          v = std::clamp(v, -90.0, 90.0);
          vel[i][d] = v;
          pos[i][d] = std::clamp(pos[i][d] + v, 0.0, 90.0);
        }
        const double c = detail::position_cost(pos[i], target, dim);
        if (c < best_cost[i]) {
          best_cost[i] = c;
          best_pos[i] = pos[i];
          if (c < best_cost[swarm_best]) swarm_best = i;
        }
      }
      ++total_iters;
      if (best_cost[swarm_best] < global_best) {
        global_best = best_cost[swarm_best];
        global_best_pos = best_pos[swarm_best];
      }
      history.push_back(global_best);
      if (global_best < params.tolerance) break;
    }
  }

  if (!std::isfinite(global_best))
    throw SolverError("no particle reached a finite cost for m = " +
                      detail::num(target));
  return detail::make_result(std::move(global_best_pos), target, config, total_iters,
                             params.seed, std::move(history));
}

/// One solve per modulation index, seeded params.seed + index so results do
/// not depend on evaluation order. All inputs are validated up front.
inline std::vector<SolveResult> solve_sweep(std::span<const ModulationIndex> m_values,
                                            const InverterConfig& config,
                                            const PsoParams& params = {}) {
  detail::validate_pso_params(params);
  std::vector<SolveResult> results;
  results.reserve(m_values.size());
  for (std::size_t i = 0; i < m_values.size(); ++i) {
    PsoParams p = params;
    p.seed = params.seed + i;
    results.push_back(solve(m_values[i], config, p));
  }
  return results;
}

/**
 * Exhaustive argmin of the cost on the grid {(t1, t2): 0 <= t1 < t2 <= 90}
 * with the given step. Verification oracle for the swarm; never used in
 * production paths. Two-angle systems only. Ties break toward the smaller
 * t1, then the smaller t2.
 */
inline SolveResult grid_oracle(const ModulationIndex& m, const InverterConfig& config,
                               double resolution_deg) {
  if (config.n_sources != 2)
    throw DomainError("grid_oracle supports exactly two switching angles");
  if (!(resolution_deg > 0.0)) throw DomainError("resolution must be positive");

  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double v = static_cast<double>(k) * resolution_deg;
    if (v >= 90.0 - resolution_deg * 0.5) break;
    grid.push_back(v);
  }
  grid.push_back(90.0);

  const std::size_t n = grid.size();
  std::vector<double> c1(n), c3(n);
  for (std::size_t i = 0; i < n; ++i) {
    c1[i] = std::cos(deg_to_rad(grid[i]));
    c3[i] = std::cos(deg_to_rad(3.0 * grid[i]));
  }

  const double target = m.value();
  const double f_scale = 2.0 / kPi;        // 4/(pi*N) with N = 2
  const double h_scale = 2.0 / (3.0 * kPi);
  double best = std::numeric_limits<double>::infinity();
  std::size_t bi = 0, bj = 1;
  long long evaluated = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = std::abs(target - f_scale * (c1[i] + c1[j])) +
                       h_scale * std::abs(c3[i] + c3[j]);
      ++evaluated;
      if (c < best) {
        best = c;
        bi = i;
        bj = j;
      }
    }
  }
  return detail::make_result({grid[bi], grid[bj]}, target, config,
                             static_cast<int>(std::min<long long>(
                                 evaluated, std::numeric_limits<int>::max())),
                             0, {best});
}

}  // namespace she

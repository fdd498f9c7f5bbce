#pragma once

#include <limits>

#include "qrd/equivalence.hpp"
#include "qrd/valuation.hpp"

namespace qrd {

// Process 1 configuration. Step size schedule gamma_i^n = gamma_i/(n+m)^p;
// (p, m) are shared across players, only the base gamma_i may differ.
struct QReplicatorConfig {
  double q = 1.0;                      // q-gradient exponent, q >= 0
  std::vector<double> gamma = {0.1};   // per-player base step; size 1 broadcasts
  double p = 0.6;                      // decay power in (1/2, 1]
  double m = 10.0;                     // decay offset > 0
  long max_episodes = 5000;            // update steps (the process itself is infinite)
  double stop_tolerance = 0.0;         // <= 0 disables early stopping
  long record_every = 1;               // trajectory thinning; step 0 and the final
                                       // state are always recorded
  long check_every = 1;                // stop-rule evaluation period

  void validate(int players) const;
  double gamma_of(int player) const {
    return gamma.size() == 1 ? gamma[0] : gamma[static_cast<std::size_t>(player)];
  }
  double step_size(int player, long n) const {
    return gamma_of(player) / std::pow(static_cast<double>(n) + m, p);
  }
};

struct TrajectoryStep {
  long n = 0;
  double grad_norm = 0.0;        // l2 over all players' components
  double dist_to_target = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> step_sizes;  // gamma_i^n
  std::vector<double> values;      // V_i(pi^n)
};

struct Trajectory {
  std::vector<StrategyProfile> profiles;  // one per recorded step
  std::vector<TrajectoryStep> steps;
  long steps_taken = 0;      // update steps actually applied
  bool stopped_early = false;  // stop_tolerance hit before max_episodes
};

// q-combination: out_a = w_a^q (row_a - sum_b w_b^q row_b / sum_b w_b^q),
// with 0^0 := 1. Shared by the exact q-gradient and the REINFORCE estimate.
std::vector<double> q_combine(const std::vector<double>& row, const std::vector<double>& w,
                              double q);

// Gradient rows are the pure-deviation values V_i(e_a, pi_{-i}).
std::vector<std::vector<double>> q_gradient(const MetaGame& meta, const StrategyProfile& pi,
                                            double q);

// Euclidean projection onto the standard simplex by the sorted-threshold
// method: theta solves sum max(x_i - theta, 0) = 1, output max(x_i - theta, 0).
// Produces exact zeros, which is what lets trajectories leave a class's
// reachability pattern in finite time.
std::vector<double> project_simplex(const std::vector<double>& x);

// Uniform draw from the radius ball around `center` intersected with the
// simplex product: gaussian direction over all coordinates (player-major),
// radius scaled by u^(1/dim), then per-player projection.
StrategyProfile sample_ball_profile(const StrategyProfile& center, double radius, Rng& rng);

// Process 1: pi^{n+1}_i = proj(pi^n_i + gamma_i^n v_i^q(pi^n)). Stops at
// max_episodes, or earlier when distance_to_class(pi^n, target) <
// stop_tolerance (target given) / grad_norm < stop_tolerance (no target).
Trajectory run_exact(const ValueEngine& engine, const MetaGame& meta, StrategyProfile pi,
                     const QReplicatorConfig& cfg, const StrategyProfile* target = nullptr);

}  // namespace qrd

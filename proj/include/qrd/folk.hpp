#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrd/equilibrium.hpp"
#include "qrd/estimator.hpp"

namespace qrd {

// min over opponent pure profiles of max over own actions (exact enumeration)
double pure_minmax(const StageGame& game, int player);

// Two players: exact zero-sum LP (opponent minimises player's utility).
// Three or more: alternating per-opponent LP descent over product
// distributions, 20 random starts plus every pure opponent profile; the
// minimum found is an upper bound on the true minmax and *approximate is set.
double mixed_minmax(const StageGame& game, int player, bool* approximate = nullptr);

// Is u in conv(points)? L1-error LP: min sum(e+ + e-) s.t.
// sum_k lambda_k p_k - u = e+ - e-, sum lambda = 1, all vars >= 0; membership
// iff the optimum is <= tol. Degenerate (affinely dependent) point sets fall
// out correctly since nothing assumes full dimension.
bool in_hull(const std::vector<std::vector<double>>& points, const std::vector<double>& u,
             double tol = 1e-9);

// W-tilde (mixed minmax, weak inequality), W-tilde-0 (strict inequality),
// W-underbar (pure minmax, weak).
enum class IrVariant { mixed, strict_mixed, pure };

std::string to_string(IrVariant v);

// Feasible payoff hull with the per-player individual-rationality floor.
struct PayoffGeometry {
  IrVariant variant = IrVariant::mixed;
  std::vector<std::vector<double>> hull_vertices;  // subset of stage payoff vectors
  std::vector<double> minmax_mixed;                // per player
  std::vector<double> minmax_pure;                 // per player
  bool minmax_approximate = false;                 // mixed values are upper bounds (3+ players)

  // hull membership (tolerance 1e-9) AND the minmax floor for the variant
  // (>= for mixed/pure, > for strict_mixed)
  bool contains(const std::vector<double>& u) const;
};

PayoffGeometry feasible_ir_set(const StageGame& game, IrVariant variant);

// Cycle-plus-punishment pure profile. Plays target_cycle; any observed
// off-script window triggers the punishment profile p (the lowest-indexed
// stage Nash profile whose opponents minmax every player: for all j,
// max_a u_j(a, p_-j) = pure_minmax(j) = u_j(p)).
//
// When min recall >= max(punishment_length + 1, cycle window) and p is not a
// cycle profile, punishment lasts punishment_length periods and the cycle
// restarts from its first profile (windows ending in [p x length, cycle
// prefix] resume; a deviation that lands exactly on p merges into the
// punishment count). Otherwise the profile degrades to grim: off-cycle
// windows punish forever (grim = true). Recall too small even for grim
// (cannot distinguish cycle positions, or zero recall) raises CapacityError
// with the minimal required length.
struct TriggerProfile {
  StrategyProfile profile;                // pure vertices
  std::vector<std::size_t> pure_index;    // per-player pure strategy index
  std::vector<int> punishment;            // punishment action per player
  bool grim = false;                      // punishment is permanent
  EquilibriumReport report;               // check_strict on the built profile
};

TriggerProfile build_trigger_profile(const RepeatedGameSpec& spec,
                                     const std::vector<std::vector<int>>& target_cycle,
                                     int punishment_length);

// Basin-of-attraction experiment around a (supposedly strict) target profile.
struct BasinResult {
  std::string target_id;
  double radius = 0.0;
  double threshold = 0.05;         // class distance counting as converged
  bool stochastic = false;
  bool target_strict = false;      // check_strict verdict on the target (warn when false)
  long seeds = 0;
  long converged = 0;
  double mean_final_distance = 0.0;
  std::vector<double> final_distance;  // per seed
  std::vector<long> episodes_used;     // per seed
  EpsilonGreedyConfig cfg;             // config snapshot (dyn half used when exact)
};

// Seed k draws its start from derive_seed(seed, 2k) and (stochastic runs) its
// episode stream from derive_seed(seed, 2k+1), so the set of runs is
// reproducible under any thread count. Trajectories keep endpoints only
// (record_every is overridden); runs stop early once the class distance
// drops below threshold unless cfg.dyn.stop_tolerance was set explicitly.
BasinResult basin_experiment(const ValueEngine& engine, const MetaGame& meta,
                             const StrategyProfile& target, double radius, long seeds,
                             const EpsilonGreedyConfig& cfg, bool stochastic,
                             std::uint64_t seed, double threshold = 0.05,
                             Parallel par = Parallel::omp,
                             const std::string& target_id = "target");

}  // namespace qrd

#pragma once

#include "qrd/dynamics.hpp"

namespace qrd {

// Behavioural strategy: per player, a conditional action distribution at
// every public recall window. Only defined under perfect monitoring with a
// common recall length, where the observed profile sequence is public.
struct BehaviouralProfile {
  std::vector<std::vector<std::vector<double>>> cond;  // [player][history][action]
};

// Public history machinery for the behavioural variant: windows over joint
// action profiles, lengths 0..recall (early periods live in the shorter
// layers, exactly as the private history spaces slice theirs).
class BehaviouralEngine {
 public:
  explicit BehaviouralEngine(RepeatedGameSpec spec);  // perfect + common recall required

  const RepeatedGameSpec& spec() const { return spec_; }
  const WindowSpace& windows() const { return windows_; }
  int players() const { return spec_.game.players; }
  int history_count() const { return windows_.count(); }

  void validate(const BehaviouralProfile& pi) const;  // shapes + simplex rows (1e-9)
  BehaviouralProfile uniform() const;
  // profile playing a fixed pure table per player ([player][history] -> action)
  BehaviouralProfile pure(const std::vector<std::vector<int>>& tables) const;

 private:
  RepeatedGameSpec spec_;
  WindowSpace windows_;
};

// V_{i,h}: expected discounted total from history h onward, the fixed point of
//   V_{i,h} = sum_a prod_j pi_j(a_j|h) (R_i(a) + delta V_{i,(h,a)_l}).
struct ContinuationValueTable {
  std::vector<std::vector<double>> v;  // [player][history]
};

ContinuationValueTable continuation_values(const BehaviouralEngine& engine,
                                           const BehaviouralProfile& pi);

// Component (i,h,alpha): replace player i's conditional at h (and only at h)
// by the pure action alpha, re-solve, read the value at h; combine the
// resulting row with the q-weights pi_{i,h}^q exactly as in the one-shot
// q-gradient. With l = 0 this is the mixed q-gradient of the repeated game
// seen as a one-shot meta-game over actions.
std::vector<std::vector<std::vector<double>>> behavioural_q_gradient(
    const BehaviouralEngine& engine, const BehaviouralProfile& pi, double q);

// One-shot-deviation test at every public history. Requires pure conditionals
// (each row a vertex within 1e-9); strict iff every off-action deviation
// loses by more than 1e-9 at its history.
struct SpneReport {
  bool is_strict = false;
  int worst_player = -1;
  int worst_history = -1;
  int worst_action = -1;
  double worst_margin = std::numeric_limits<double>::infinity();  // min over deviations
  ContinuationValueTable values;                                  // at the profile itself
};

SpneReport check_strict_spne(const BehaviouralEngine& engine, const BehaviouralProfile& pi);

// sup over (player, history) of the conditional total-variation distance
double behavioural_distance(const BehaviouralProfile& a, const BehaviouralProfile& b);

// independent gaussian-ball perturbation of every conditional row, projected
BehaviouralProfile sample_behavioural_ball(const BehaviouralProfile& center, double radius,
                                           Rng& rng);

struct BehaviouralTrajectory {
  std::vector<BehaviouralProfile> profiles;
  std::vector<TrajectoryStep> steps;  // values = continuation values at the empty history
  long steps_taken = 0;
  bool stopped_early = false;
};

// Projected behavioural q-replicator: every conditional row takes the step
// gamma_i^n v_{i,h} and is projected back to its simplex. Distances (and the
// stop rule) use behavioural_distance to the target when one is given.
BehaviouralTrajectory run_behavioural(const BehaviouralEngine& engine, BehaviouralProfile pi,
                                      const QReplicatorConfig& cfg,
                                      const BehaviouralProfile* target = nullptr);

}  // namespace qrd

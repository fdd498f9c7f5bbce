#pragma once

#include "qrd/valuation.hpp"

namespace qrd {

// Reachability and induced conditional action distributions of a profile,
// per player and private window. A window is reachable iff it carries
// positive discounted visit mass under some pure profile in the support.
// The conditional at a reachable window is the occupancy-weighted average of
// the support's (deterministic) choices there; for profiles that play
// deterministically on path this is exactly the induced play.
struct ClassAnalysis {
  std::vector<std::vector<std::uint8_t>> reachable;  // [player][history]
  std::vector<std::vector<double>> mass;             // [player][history]
  std::vector<std::vector<double>> cond;             // [player][history * actions + a]
};

ClassAnalysis analyze_class(const ValueEngine& engine, const StrategyProfile& pi);

// the two-analysis primitives; the profile-level wrappers below just run
// analyze_class on both sides (reuse these when one side is fixed in a loop)
bool same_class(const ValueEngine& engine, const ClassAnalysis& a, const ClassAnalysis& b,
                double tol = 1e-9);
double class_distance(const ValueEngine& engine, const ClassAnalysis& pi,
                      const ClassAnalysis& target);

// ids of reachable private windows, per player
std::vector<std::vector<int>> reachable_histories(const ValueEngine& engine,
                                                  const StrategyProfile& pi);

// pi ~ pi' iff reachability matches everywhere and the induced conditionals
// agree (TV <= tol) on commonly reachable windows; payoffs are invariant
// within a class
bool same_class(const ValueEngine& engine, const StrategyProfile& a, const StrategyProfile& b,
                double tol = 1e-9);

// max over target-reachable common windows of the conditional TV distance,
// plus 1 for every window reachable under exactly one profile; 0 iff
// same_class
double distance_to_class(const ValueEngine& engine, const StrategyProfile& pi,
                         const StrategyProfile& target);

}  // namespace qrd

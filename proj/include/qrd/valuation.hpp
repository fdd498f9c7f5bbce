#pragma once

#include <atomic>
#include <memory>
#include <mutex>

#include "qrd/strategy.hpp"

namespace qrd {

// One sampled play of the repeated game. Periods are indexed from 0; the
// episode ran for periods() periods before the continuation coin came up
// tails. Draw order per episode (fixed; seeds are meaningless otherwise):
// pure-strategy draws in player order, then per period: for each player in
// order an exploration coin and, when exploring, a uniform action (greedy
// sampling only), then the signal, then the continuation coin.
struct Episode {
  std::vector<std::size_t> drawn;             // pure strategy index per player
  std::vector<std::vector<int>> actions;      // [period][player]
  std::vector<int> signals;                   // [period] joint signal id
  std::vector<std::vector<double>> rewards;   // [period][player]
  std::vector<std::vector<std::uint8_t>> explored;  // [period][player]; empty unless greedy

  int periods() const { return static_cast<int>(actions.size()); }
  double total_reward(int player) const {
    double s = 0.0;
    for (auto& r : rewards) s += r[player];
    return s;
  }
};

// Exact per-player data for one pure strategy profile: expected total reward
//   V_i = E[sum_{t>=1} delta^{t-1} r_i^t]
// and the discounted visit mass of each private window,
//   visits_i(h) = sum_{t>=1} delta^{t-1} P(window_i at period t = h),
// both from a linear solve over the joint recall states reachable under the
// profile (dense LU up to 2000 states, damped fixed point above).
struct PureData {
  std::vector<double> value;                // [player]
  std::vector<std::vector<double>> visits;  // [player][history id]
};

// Normal-form reduction: payoff tensors over the enumerated pure strategies.
struct MetaGame {
  std::vector<std::size_t> counts;          // per-player pure-strategy counts
  MixedRadix joint;
  std::vector<std::vector<double>> payoff;  // [player][joint pure profile]
};

// Exact valuation machinery for one RepeatedGameSpec: per-player history
// spaces and pure-strategy enumerations, the joint recall-state space, and
// memoized per-profile solves.
class ValueEngine {
 public:
  explicit ValueEngine(RepeatedGameSpec spec);
  ValueEngine(const ValueEngine&) = delete;
  ValueEngine& operator=(const ValueEngine&) = delete;

  const RepeatedGameSpec& spec() const { return spec_; }
  int players() const { return spec_.game.players; }
  const HistorySpace& histories(int i) const { return histories_[i]; }
  const PureStrategySet& strategies(int i) const { return strategies_[i]; }
  const MixedRadix& joint() const { return joint_; }
  int state_count() const { return static_cast<int>(states_.size()); }

  void validate_profile(const StrategyProfile& pi) const;

  // memoized exact solve for a joint pure profile
  const PureData& pure_data(std::size_t joint_index) const;
  // uncached exact values only (meta-game fills don't keep visit vectors)
  std::vector<double> values_of(std::size_t joint_index) const;
  std::vector<double> value_of_pure_profile(const std::vector<PureStrategy>& profile) const;
  // exact values when every period each player's action is replaced by a
  // uniform draw with probability eps (the greedy execution semantics)
  std::vector<double> greedy_values_of(std::size_t joint_index, double eps) const;

  // fill the whole pure-profile cache up front (before parallel read-only use)
  void prime_pure_cache(Parallel par = Parallel::omp) const;

  Episode sample_episode(const StrategyProfile& pi, Rng& rng) const;
  // greedy sampling: pure strategies drawn from pi at the start, per-period
  // uniform replacement with probability eps, replacements recorded
  Episode sample_episode_greedy(const StrategyProfile& pi, double eps, Rng& rng) const;

 private:
  struct Transition {
    int next;
    double prob;
  };

  RepeatedGameSpec spec_;
  std::vector<HistorySpace> histories_;
  std::vector<PureStrategySet> strategies_;
  MixedRadix joint_;
  std::vector<std::vector<int>> states_;              // [state][player] window id
  std::vector<std::vector<std::vector<Transition>>> trans_;  // [state][profile]

  std::size_t profile_of(int state, const std::vector<std::vector<std::uint8_t>>& tables) const;
  PureData compute_pure(std::size_t joint_index, bool with_visits) const;
  void ensure_cache() const;

  mutable std::mutex mu_;
  mutable std::atomic<bool> cache_ready_{false};
  mutable std::vector<std::unique_ptr<PureData>> cache_;
  mutable std::unique_ptr<std::atomic<std::uint8_t>[]> filled_;
};

MetaGame build_meta_game(const ValueEngine& engine, Parallel par = Parallel::omp);

// multilinear V_i(pi) = sum_e prod_j pi_j(e_j) payoff_i(e)
std::vector<double> mixed_value(const MetaGame& meta, const StrategyProfile& pi);

// rows[i][a] = V_i(e_a, pi_{-i}); the building block for gradients and
// equilibrium checks (pure deviations suffice by multilinearity)
std::vector<std::vector<double>> deviation_rows(const MetaGame& meta, const StrategyProfile& pi);

}  // namespace qrd

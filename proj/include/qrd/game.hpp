#pragma once

#include <string>
#include <vector>

#include "qrd/common.hpp"

namespace qrd {

// One-shot stage game G = (N, A, R). Rewards are stored densely per player,
// indexed by the mixed-radix action-profile index (player 0 most significant).
struct StageGame {
  int players = 0;
  std::vector<int> action_counts;
  std::vector<std::vector<std::string>> action_names;  // [player][action]
  std::vector<std::vector<double>> payoffs;            // [player][profile]
  MixedRadix profiles;

  std::size_t num_profiles() const { return profiles.count(); }
  double reward(int player, std::size_t profile) const { return payoffs[player][profile]; }

  // payoffs_flat: per player, row-major over profiles
  static StageGame make(std::vector<int> action_counts,
                        std::vector<std::vector<double>> payoffs_flat,
                        std::vector<std::vector<std::string>> names = {});
};

// u_i(sigma) for an independent mixed action profile; validates each sigma_i
// (matching dimension, entries >= -1e-12, sum within 1e-9 of 1).
std::vector<double> one_shot_utility(const StageGame& game,
                                     const std::vector<std::vector<double>>& sigma);

// Signal structure: per-profile distributions over joint signals
// (joint index = mixed radix over per-player signal counts, player 0 first).
struct MonitoringStructure {
  int players = 0;
  std::vector<int> signal_counts;
  std::vector<std::vector<std::string>> signal_names;  // [player][signal]
  std::vector<std::vector<double>> kernel;             // [profile][joint signal]
  std::vector<std::vector<int>> support;               // positive-probability joint signals
  MixedRadix joints;
  bool is_perfect = false;  // each player's signal pins down the full profile on support
  bool is_public = false;   // all players always see the same signal on support

  int signal_of(std::size_t joint, int player) const { return joints.digit(joint, player); }

  // rows are renormalized when |sum - 1| <= 1e-9 and rejected otherwise;
  // entries below -1e-12 are rejected, tiny negatives are clamped to 0
  static MonitoringStructure make(const StageGame& game, std::vector<int> signal_counts,
                                  std::vector<std::vector<double>> kernel,
                                  std::vector<std::vector<std::string>> names = {});
};

// Perfect monitoring: Z_i = A, the realized profile is announced to everyone.
MonitoringStructure perfect_monitoring(const StageGame& game);

// The repeated game: stage game + monitoring + continuation probability delta
// + per-player recall lengths. `prune_unreachable` drops (a_i, z_i) pairs with
// zero kernel probability under every profile from the history alphabet.
struct RepeatedGameSpec {
  StageGame game;
  MonitoringStructure monitoring;
  double delta = 0.0;             // P(continue) each period, in [0, 1)
  std::vector<int> recall;        // l_i >= 0
  bool prune_unreachable = true;
  std::size_t strategy_cap = 4096;  // per-player pure-strategy enumeration cap

  void validate() const;
};

// Player i's realized reward must be a function of (a_i, z_i) for the
// learning algorithms to be well-posed; violations are reported, not fatal.
struct DeducibilityViolation {
  int player;
  std::size_t profile_a, profile_b;  // same own action, same possible own signal
  int action, signal;
};

std::vector<DeducibilityViolation> validate_reward_deducibility(const RepeatedGameSpec& spec);

}  // namespace qrd

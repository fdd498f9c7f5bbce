#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qrd/game.hpp"

namespace qrd {

// All sequences of length 0..cap over a finite alphabet, id'd layer by layer
// (empty window = id 0, then length-1 windows, ...). Within a layer the id is
// the mixed-radix value of the symbols, oldest entry most significant.
// Serves both private (a_i, z_i) recall windows and public profile windows.
class WindowSpace {
 public:
  WindowSpace() = default;
  WindowSpace(int symbols, int cap);

  int symbols() const { return symbols_; }
  int cap() const { return cap_; }
  int count() const { return static_cast<int>(total_); }
  int length(int id) const;
  std::vector<int> entries(int id) const;          // oldest first
  int id_of(const std::vector<int>& entries) const;
  // grow while below cap, afterwards drop the oldest entry (rolling window)
  int append(int id, int symbol) const;

 private:
  int symbols_ = 1, cap_ = 0;
  std::vector<std::int64_t> offset_;  // offset_[k] = first id of length-k layer
  std::int64_t total_ = 1;
};

struct PrivateHistory {
  int player = 0;
  int id = 0;
  std::vector<std::pair<int, int>> entries;  // (own action, own signal), oldest first
};

// Player i's decision points: windows over the kept (a_i, z_i) pairs, lengths
// 0..recall. Early periods live in the shorter layers (the empty window is
// the first move). Pruning keeps a pair iff some action profile playing a_i
// can emit z_i with positive probability.
class HistorySpace {
 public:
  HistorySpace(const RepeatedGameSpec& spec, int player);

  int player() const { return player_; }
  int recall() const { return recall_; }
  int count() const { return windows_.count(); }
  int pair_count() const { return static_cast<int>(pairs_.size()); }
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }
  // -1 when the pair was pruned away
  int pair_id(int action, int signal) const { return pair_of_[action * signals_ + signal]; }
  int append(int id, int action, int signal) const;
  PrivateHistory history(int id) const;
  int id_of(const std::vector<std::pair<int, int>>& entries) const;

 private:
  int player_ = 0, recall_ = 0, signals_ = 0;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> pair_of_;
  WindowSpace windows_;
};

// Pure strategy as an explicit history-indexed action table.
struct PureStrategy {
  int player = 0;
  std::vector<std::uint8_t> table;  // [history id] -> action
};

// The enumeration of all |A_i|^{#histories} tables, ordered lexicographically
// over the table (history 0 = empty window is the most significant digit).
class PureStrategySet {
 public:
  PureStrategySet(const HistorySpace& hs, int action_count, std::size_t cap);

  std::size_t count() const { return count_; }
  int histories() const { return histories_; }
  int actions() const { return actions_; }
  int action_at(std::size_t strategy, int history) const {
    return static_cast<int>((strategy / pow_[history]) % actions_);
  }
  std::vector<std::uint8_t> table(std::size_t strategy) const;
  std::size_t index_of(const std::vector<std::uint8_t>& table) const;

 private:
  int actions_ = 0, histories_ = 0;
  std::size_t count_ = 1;
  std::vector<std::size_t> pow_;  // pow_[h] = actions^(H-1-h)
};

// Mixed strategy = distribution over the enumerated pure strategies.
struct MixedStrategy {
  int player = 0;
  std::vector<double> w;

  void validate(double tol = 1e-9) const;
  std::vector<std::size_t> support() const;
  static MixedStrategy uniform(int player, std::size_t n);
  static MixedStrategy vertex(int player, std::size_t n, std::size_t pure_index);
};

using StrategyProfile = std::vector<MixedStrategy>;

double tv_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace qrd

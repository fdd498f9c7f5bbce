#include "qrd/strategy.hpp"

#include <cmath>

namespace qrd {

namespace {
constexpr std::int64_t kWindowCap = 4'000'000;  // hard sanity bound on window counts
}

WindowSpace::WindowSpace(int symbols, int cap) : symbols_(symbols), cap_(cap) {
  if (symbols < 1) throw std::invalid_argument("WindowSpace: empty alphabet");
  if (cap < 0) throw std::invalid_argument("WindowSpace: negative cap");
  offset_.assign(cap + 2, 0);
  std::int64_t level = 1;
  total_ = 0;
  for (int k = 0; k <= cap; ++k) {
    offset_[k] = total_;
    total_ += level;
    if (total_ > kWindowCap)
      throw CapacityError("WindowSpace: too many windows", static_cast<double>(total_),
                          static_cast<double>(kWindowCap));
    level *= symbols;
  }
  offset_[cap + 1] = total_;
}

int WindowSpace::length(int id) const {
  int k = 0;
  while (offset_[k + 1] <= id) ++k;
  return k;
}

std::vector<int> WindowSpace::entries(int id) const {
  int k = length(id);
  std::int64_t pos = id - offset_[k];
  std::vector<int> e(k);
  for (int i = k - 1; i >= 0; --i) {
    e[i] = static_cast<int>(pos % symbols_);
    pos /= symbols_;
  }
  return e;
}

int WindowSpace::id_of(const std::vector<int>& entries) const {
  int k = static_cast<int>(entries.size());
  if (k > cap_) throw std::invalid_argument("WindowSpace: window longer than cap");
  std::int64_t pos = 0;
  for (int s : entries) {
    if (s < 0 || s >= symbols_) throw std::invalid_argument("WindowSpace: symbol out of range");
    pos = pos * symbols_ + s;
  }
  return static_cast<int>(offset_[k] + pos);
}

int WindowSpace::append(int id, int symbol) const {
  if (symbol < 0 || symbol >= symbols_)
    throw std::invalid_argument("WindowSpace: symbol out of range");
  int k = length(id);
  std::int64_t pos = id - offset_[k];
  if (k < cap_) return static_cast<int>(offset_[k + 1] + pos * symbols_ + symbol);
  if (cap_ == 0) return 0;
  std::int64_t head = 1;
  for (int i = 1; i < cap_; ++i) head *= symbols_;
  return static_cast<int>(offset_[cap_] + (pos % head) * symbols_ + symbol);
}

HistorySpace::HistorySpace(const RepeatedGameSpec& spec, int player) : player_(player) {
  spec.validate();
  recall_ = spec.recall[player];
  signals_ = spec.monitoring.signal_counts[player];
  int actions = spec.game.action_counts[player];
  pair_of_.assign(actions * signals_, -1);
  for (int a = 0; a < actions; ++a) {
    for (int z = 0; z < signals_; ++z) {
      bool keep = !spec.prune_unreachable;
      if (!keep) {
        // reachable iff some profile with a_i = a emits z_i = z
        for (std::size_t p = 0; p < spec.game.num_profiles() && !keep; ++p) {
          if (spec.game.profiles.digit(p, player) != a) continue;
          for (int zj : spec.monitoring.support[p])
            if (spec.monitoring.joints.digit(zj, player) == z) {
              keep = true;
              break;
            }
        }
      }
      if (keep) {
        pair_of_[a * signals_ + z] = static_cast<int>(pairs_.size());
        pairs_.emplace_back(a, z);
      }
    }
  }
  if (pairs_.empty()) throw std::invalid_argument("HistorySpace: no observable pairs");
  windows_ = WindowSpace(static_cast<int>(pairs_.size()), recall_);
}

int HistorySpace::append(int id, int action, int signal) const {
  int p = pair_id(action, signal);
  if (p < 0) throw std::invalid_argument("HistorySpace: unreachable (action, signal) pair");
  return windows_.append(id, p);
}

PrivateHistory HistorySpace::history(int id) const {
  PrivateHistory h;
  h.player = player_;
  h.id = id;
  for (int s : windows_.entries(id)) h.entries.push_back(pairs_[s]);
  return h;
}

int HistorySpace::id_of(const std::vector<std::pair<int, int>>& entries) const {
  std::vector<int> syms;
  for (auto& [a, z] : entries) {
    int p = pair_id(a, z);
    if (p < 0) throw std::invalid_argument("HistorySpace: unreachable (action, signal) pair");
    syms.push_back(p);
  }
  return windows_.id_of(syms);
}

PureStrategySet::PureStrategySet(const HistorySpace& hs, int action_count, std::size_t cap)
    : actions_(action_count), histories_(hs.count()) {
  double needed = std::pow(static_cast<double>(actions_), static_cast<double>(histories_));
  if (needed > static_cast<double>(cap))
    throw CapacityError("PureStrategySet: enumeration exceeds cap", needed,
                        static_cast<double>(cap));
  count_ = 1;
  pow_.assign(histories_, 1);
  for (int h = histories_ - 1; h >= 0; --h) {
    pow_[h] = count_;
    count_ *= static_cast<std::size_t>(actions_);
  }
}

std::vector<std::uint8_t> PureStrategySet::table(std::size_t strategy) const {
  std::vector<std::uint8_t> t(histories_);
  for (int h = 0; h < histories_; ++h)
    t[h] = static_cast<std::uint8_t>(action_at(strategy, h));
  return t;
}

std::size_t PureStrategySet::index_of(const std::vector<std::uint8_t>& table) const {
  if (static_cast<int>(table.size()) != histories_)
    throw std::invalid_argument("PureStrategySet: table size mismatch");
  std::size_t idx = 0;
  for (int h = 0; h < histories_; ++h) {
    if (table[h] >= actions_) throw std::invalid_argument("PureStrategySet: action out of range");
    idx += pow_[h] * table[h];
  }
  return idx;
}

void MixedStrategy::validate(double tol) const {
  double s = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < -1e-12)
      throw std::invalid_argument("MixedStrategy: negative or non-finite weight");
    s += x;
  }
  if (std::fabs(s - 1.0) > tol)
    throw std::invalid_argument("MixedStrategy: weights sum to " + std::to_string(s));
}

std::vector<std::size_t> MixedStrategy::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s.push_back(i);
  return s;
}

MixedStrategy MixedStrategy::uniform(int player, std::size_t n) {
  MixedStrategy m;
  m.player = player;
  m.w.assign(n, 1.0 / static_cast<double>(n));
  return m;
}

MixedStrategy MixedStrategy::vertex(int player, std::size_t n, std::size_t pure_index) {
  if (pure_index >= n) throw std::invalid_argument("MixedStrategy: vertex index out of range");
  MixedStrategy m;
  m.player = player;
  m.w.assign(n, 0.0);
  m.w[pure_index] = 1.0;
  return m;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace qrd

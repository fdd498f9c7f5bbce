#include "qrd/game.hpp"

#include <cmath>

namespace qrd {

StageGame StageGame::make(std::vector<int> action_counts,
                          std::vector<std::vector<double>> payoffs_flat,
                          std::vector<std::vector<std::string>> names) {
  StageGame g;
  g.players = static_cast<int>(action_counts.size());
  if (g.players < 1) throw std::invalid_argument("StageGame: need at least one player");
  for (int c : action_counts)
    if (c < 1) throw std::invalid_argument("StageGame: empty action set");
  g.action_counts = std::move(action_counts);
  g.profiles = MixedRadix(g.action_counts);
  if (static_cast<int>(payoffs_flat.size()) != g.players)
    throw std::invalid_argument("StageGame: payoff rows != players");
  for (auto& row : payoffs_flat) {
    if (row.size() != g.profiles.count())
      throw std::invalid_argument("StageGame: payoff row size != profile count");
    if (!all_finite(row)) throw std::invalid_argument("StageGame: non-finite payoff");
  }
  g.payoffs = std::move(payoffs_flat);
  if (names.empty()) {
    names.resize(g.players);
    for (int i = 0; i < g.players; ++i)
      for (int a = 0; a < g.action_counts[i]; ++a)
        names[i].push_back("a" + std::to_string(a));
  }
  if (static_cast<int>(names.size()) != g.players)
    throw std::invalid_argument("StageGame: name rows != players");
  for (int i = 0; i < g.players; ++i)
    if (static_cast<int>(names[i].size()) != g.action_counts[i])
      throw std::invalid_argument("StageGame: action name count mismatch");
  g.action_names = std::move(names);
  return g;
}

std::vector<double> one_shot_utility(const StageGame& game,
                                     const std::vector<std::vector<double>>& sigma) {
  if (static_cast<int>(sigma.size()) != game.players)
    throw std::invalid_argument("one_shot_utility: profile size != players");
  for (int i = 0; i < game.players; ++i) {
    if (static_cast<int>(sigma[i].size()) != game.action_counts[i])
      throw std::invalid_argument("one_shot_utility: distribution dimension mismatch");
    double s = 0.0;
    for (double w : sigma[i]) {
      if (!std::isfinite(w) || w < -1e-12)
        throw std::invalid_argument("one_shot_utility: negative weight");
      s += w;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::invalid_argument("one_shot_utility: weights do not sum to 1");
  }
  std::vector<double> u(game.players, 0.0);
  for (std::size_t p = 0; p < game.num_profiles(); ++p) {
    double w = 1.0;
    for (int i = 0; i < game.players && w != 0.0; ++i)
      w *= sigma[i][game.profiles.digit(p, i)];
    if (w == 0.0) continue;
    for (int i = 0; i < game.players; ++i) u[i] += w * game.payoffs[i][p];
  }
  return u;
}

MonitoringStructure MonitoringStructure::make(const StageGame& game,
                                              std::vector<int> signal_counts,
                                              std::vector<std::vector<double>> kernel,
                                              std::vector<std::vector<std::string>> names) {
  MonitoringStructure m;
  m.players = game.players;
  if (static_cast<int>(signal_counts.size()) != game.players)
    throw std::invalid_argument("MonitoringStructure: signal set per player required");
  for (int c : signal_counts)
    if (c < 1) throw std::invalid_argument("MonitoringStructure: empty signal set");
  m.signal_counts = std::move(signal_counts);
  m.joints = MixedRadix(m.signal_counts);
  if (kernel.size() != game.num_profiles())
    throw std::invalid_argument("MonitoringStructure: kernel row per action profile required");
  for (auto& row : kernel) {
    if (row.size() != m.joints.count())
      throw std::invalid_argument("MonitoringStructure: kernel row length != joint signal count");
    double s = 0.0;
    for (double& v : row) {
      if (!std::isfinite(v) || v < -1e-12)
        throw std::invalid_argument("MonitoringStructure: negative kernel probability");
      if (v < 0.0) v = 0.0;
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::invalid_argument("MonitoringStructure: kernel row does not sum to 1");
    for (double& v : row) v /= s;
  }
  m.kernel = std::move(kernel);
  m.support.resize(m.kernel.size());
  for (std::size_t p = 0; p < m.kernel.size(); ++p)
    for (std::size_t z = 0; z < m.joints.count(); ++z)
      if (m.kernel[p][z] > 0.0) m.support[p].push_back(static_cast<int>(z));

  if (names.empty()) {
    names.resize(m.players);
    for (int i = 0; i < m.players; ++i)
      for (int z = 0; z < m.signal_counts[i]; ++z)
        names[i].push_back("z" + std::to_string(z));
  }
  for (int i = 0; i < m.players; ++i)
    if (static_cast<int>(names[i].size()) != m.signal_counts[i])
      throw std::invalid_argument("MonitoringStructure: signal name count mismatch");
  m.signal_names = std::move(names);

  // is_perfect: across the whole kernel, a player's signal value may be
  // produced by at most one action profile
  m.is_perfect = true;
  for (int i = 0; i < m.players && m.is_perfect; ++i) {
    std::vector<long long> seen(m.signal_counts[i], -1);
    for (std::size_t p = 0; p < m.kernel.size() && m.is_perfect; ++p)
      for (int z : m.support[p]) {
        int zi = m.joints.digit(z, i);
        if (seen[zi] == -1)
          seen[zi] = static_cast<long long>(p);
        else if (seen[zi] != static_cast<long long>(p))
          m.is_perfect = false;
      }
  }
  // is_public: equal signal counts and all support joints are diagonal
  m.is_public = true;
  for (int i = 1; i < m.players; ++i)
    if (m.signal_counts[i] != m.signal_counts[0]) m.is_public = false;
  for (std::size_t p = 0; p < m.kernel.size() && m.is_public; ++p)
    for (int z : m.support[p])
      for (int i = 1; i < m.players; ++i)
        if (m.joints.digit(z, i) != m.joints.digit(z, 0)) m.is_public = false;
  return m;
}

MonitoringStructure perfect_monitoring(const StageGame& game) {
  std::size_t np = game.num_profiles();
  std::vector<int> counts(game.players, static_cast<int>(np));
  std::vector<std::vector<double>> kernel(np, std::vector<double>(0));
  MixedRadix joints(counts);
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<double> row(joints.count(), 0.0);
    std::vector<int> diag(game.players, static_cast<int>(p));
    row[joints.index(diag)] = 1.0;
    kernel[p] = std::move(row);
  }
  std::vector<std::vector<std::string>> names(game.players);
  for (int i = 0; i < game.players; ++i)
    for (std::size_t p = 0; p < np; ++p) {
      std::string n;
      for (int j = 0; j < game.players; ++j)
        n += game.action_names[j][game.profiles.digit(p, j)];
      names[i].push_back(n);
    }
  return MonitoringStructure::make(game, counts, std::move(kernel), std::move(names));
}

void RepeatedGameSpec::validate() const {
  if (monitoring.players != game.players)
    throw std::invalid_argument("RepeatedGameSpec: monitoring/game player mismatch");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("RepeatedGameSpec: delta must lie in [0,1)");
  if (static_cast<int>(recall.size()) != game.players)
    throw std::invalid_argument("RepeatedGameSpec: recall length per player required");
  for (int l : recall)
    if (l < 0 || l > 16) throw std::invalid_argument("RepeatedGameSpec: recall out of range");
  if (strategy_cap < 1) throw std::invalid_argument("RepeatedGameSpec: strategy cap < 1");
}

std::vector<DeducibilityViolation> validate_reward_deducibility(const RepeatedGameSpec& spec) {
  spec.validate();
  const StageGame& g = spec.game;
  const MonitoringStructure& m = spec.monitoring;
  std::vector<DeducibilityViolation> out;
  for (int i = 0; i < g.players; ++i) {
    for (std::size_t a = 0; a < g.num_profiles(); ++a) {
      for (std::size_t b = a + 1; b < g.num_profiles(); ++b) {
        if (g.profiles.digit(a, i) != g.profiles.digit(b, i)) continue;
        if (g.payoffs[i][a] == g.payoffs[i][b]) continue;
        // shared own signal with positive probability under both profiles?
        int shared = -1;
        for (int za : m.support[a]) {
          int zi = m.joints.digit(za, i);
          for (int zb : m.support[b])
            if (m.joints.digit(zb, i) == zi) {
              shared = zi;
              break;
            }
          if (shared >= 0) break;
        }
        if (shared >= 0)
          out.push_back({i, a, b, g.profiles.digit(a, i), shared});
      }
    }
  }
  return out;
}

}  // namespace qrd

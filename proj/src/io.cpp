#include "qrd/io.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qrd::io {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("io: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::invalid_argument("io: cannot write " + path);
  out << body;
  if (!out) throw std::runtime_error("io: short write to " + path);
}

void normalize_weights(std::vector<double>& w, const std::string& what) {
  if (w.empty()) throw std::invalid_argument(what + ": empty weight vector");
  double sum = 0.0;
  for (double& x : w) {
    if (!std::isfinite(x)) throw std::invalid_argument(what + ": non-finite weight");
    if (x < 0.0) {
      if (x < -1e-12) throw std::invalid_argument(what + ": negative weight " + fmt17(x));
      x = 0.0;
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument(what + ": weights sum to " + fmt17(sum) + ", not 1");
  for (double& x : w) x /= sum;
}

// --------------------------------------------------------------------------
// game files
// --------------------------------------------------------------------------

namespace {

// true iff the kernel is exactly the canonical announce-the-profile form
// produced by perfect_monitoring (signal id == profile id for every player)
bool canonical_perfect(const RepeatedGameSpec& spec) {
  const auto& m = spec.monitoring;
  const std::size_t np = spec.game.num_profiles();
  for (int c : m.signal_counts)
    if (static_cast<std::size_t>(c) != np) return false;
  for (std::size_t p = 0; p < np; ++p) {
    std::size_t joint = 0;
    for (int i = 0; i < m.players; ++i) joint = joint * np + p;
    for (std::size_t z = 0; z < m.kernel[p].size(); ++z) {
      const double want = (z == joint) ? 1.0 : 0.0;
      if (m.kernel[p][z] != want) return false;
    }
  }
  return true;
}

int index_of_name(const std::vector<std::string>& names, const std::string& s,
                  const std::string& what) {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == s) return static_cast<int>(k);
  throw std::invalid_argument(what + ": unknown name '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

json game_to_json(const RepeatedGameSpec& spec) {
  json j;
  j["action_names"] = spec.game.action_names;
  j["payoffs"] = spec.game.payoffs;
  if (spec.monitoring.is_perfect && canonical_perfect(spec)) {
    j["monitoring"] = "perfect";
  } else {
    json m;
    m["signal_counts"] = spec.monitoring.signal_counts;
    m["signal_names"] = spec.monitoring.signal_names;
    m["kernel"] = spec.monitoring.kernel;
    j["monitoring"] = m;
  }
  j["delta"] = spec.delta;
  j["recall"] = spec.recall;
  j["strategy_cap"] = spec.strategy_cap;
  j["prune_unreachable"] = spec.prune_unreachable;
  return j;
}

RepeatedGameSpec game_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("game file: not a JSON object");
  std::vector<std::vector<std::string>> names;
  std::vector<int> counts;
  if (j.contains("action_names")) {
    names = j.at("action_names").get<std::vector<std::vector<std::string>>>();
    for (auto& n : names) counts.push_back(static_cast<int>(n.size()));
  } else if (j.contains("action_counts")) {
    counts = j.at("action_counts").get<std::vector<int>>();
    for (int c : counts) {
      std::vector<std::string> n;
      for (int a = 0; a < c; ++a) n.push_back("a" + std::to_string(a));
      names.push_back(std::move(n));
    }
  } else {
    throw std::invalid_argument("game file: need action_names or action_counts");
  }
  auto payoffs = j.at("payoffs").get<std::vector<std::vector<double>>>();
  StageGame game = StageGame::make(counts, std::move(payoffs), std::move(names));

  RepeatedGameSpec spec;
  spec.game = std::move(game);
  const json& mon = j.contains("monitoring") ? j.at("monitoring") : json("perfect");
  if (mon.is_string()) {
    if (mon.get<std::string>() != "perfect")
      throw std::invalid_argument("game file: unknown monitoring '" + mon.get<std::string>() +
                                  "'");
    spec.monitoring = perfect_monitoring(spec.game);
  } else {
    auto sig_counts = mon.at("signal_counts").get<std::vector<int>>();
    auto kernel = mon.at("kernel").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<std::string>> sig_names;
    if (mon.contains("signal_names"))
      sig_names = mon.at("signal_names").get<std::vector<std::vector<std::string>>>();
    spec.monitoring =
        MonitoringStructure::make(spec.game, std::move(sig_counts), std::move(kernel),
                                  std::move(sig_names));
  }
  spec.delta = j.value("delta", 0.0);
  if (j.contains("recall")) {
    const json& r = j.at("recall");
    if (r.is_number_integer())
      spec.recall.assign(spec.game.players, r.get<int>());
    else
      spec.recall = r.get<std::vector<int>>();
  } else {
    spec.recall.assign(spec.game.players, 0);
  }
  spec.strategy_cap = j.value("strategy_cap", std::size_t{4096});
  spec.prune_unreachable = j.value("prune_unreachable", true);
  spec.validate();
  return spec;
}

RepeatedGameSpec load_game(const std::string& path) {
  return game_from_json(json::parse(read_text(path)));
}

void save_game(const RepeatedGameSpec& spec, const std::string& path) {
  write_text(path, game_to_json(spec).dump(2) + "\n");
}

// --------------------------------------------------------------------------
// window labels
// --------------------------------------------------------------------------

std::string history_label(const ValueEngine& engine, int player, int history_id) {
  const auto& spec = engine.spec();
  const PrivateHistory h = engine.histories(player).history(history_id);
  std::string out;
  for (std::size_t k = 0; k < h.entries.size(); ++k) {
    if (k) out += ';';
    out += spec.game.action_names[player][h.entries[k].first];
    out += ':';
    out += spec.monitoring.signal_names[player][h.entries[k].second];
  }
  return out;
}

int history_id_from_label(const ValueEngine& engine, int player, const std::string& label) {
  const auto& spec = engine.spec();
  const auto& hs = engine.histories(player);
  std::vector<std::pair<int, int>> entries;
  for (const std::string& tok : split(label, ';')) {
    const std::size_t pos = tok.find(':');
    if (pos == std::string::npos)
      throw std::invalid_argument("window label '" + label + "': entry '" + tok +
                                  "' is not action:signal");
    const int a = index_of_name(spec.game.action_names[player], tok.substr(0, pos),
                                "window label action");
    const int z = index_of_name(spec.monitoring.signal_names[player], tok.substr(pos + 1),
                                "window label signal");
    if (hs.pair_id(a, z) < 0)
      throw std::invalid_argument("window label '" + label +
                                  "': pair is unreachable under this monitoring");
    entries.emplace_back(a, z);
  }
  return hs.id_of(entries);
}

// --------------------------------------------------------------------------
// strategy-profile files
// --------------------------------------------------------------------------

json profile_to_json(const ValueEngine& engine, const StrategyProfile& pi) {
  engine.validate_profile(pi);
  json arr = json::array();
  for (int i = 0; i < engine.players(); ++i) {
    json e;
    e["player"] = i;
    e["weights"] = pi[i].w;
    arr.push_back(std::move(e));
  }
  json j;
  j["players"] = engine.players();
  j["strategies"] = std::move(arr);
  return j;
}

namespace {

MixedStrategy strategy_from_entry(const ValueEngine& engine, int player, const json& e) {
  const auto& set = engine.strategies(player);
  if (e.contains("weights")) {
    auto w = e.at("weights").get<std::vector<double>>();
    if (w.size() != set.count())
      throw std::invalid_argument("profile file: player " + std::to_string(player) + " has " +
                                  std::to_string(w.size()) + " weights, expected " +
                                  std::to_string(set.count()));
    normalize_weights(w, "profile file player " + std::to_string(player));
    MixedStrategy m;
    m.player = player;
    m.w = std::move(w);
    return m;
  }
  if (e.contains("pure_index")) {
    const std::size_t idx = e.at("pure_index").get<std::size_t>();
    if (idx >= set.count())
      throw std::invalid_argument("profile file: pure_index out of range for player " +
                                  std::to_string(player));
    return MixedStrategy::vertex(player, set.count(), idx);
  }
  if (e.contains("table")) {
    const json& tab = e.at("table");
    if (!tab.is_object()) throw std::invalid_argument("profile file: table must be an object");
    const auto& names = engine.spec().game.action_names[player];
    std::vector<std::uint8_t> t(set.histories());
    for (int h = 0; h < set.histories(); ++h) {
      const std::string label = history_label(engine, player, h);
      const json* cell = nullptr;
      if (tab.contains(label))
        cell = &tab.at(label);
      else if (tab.contains("default"))
        cell = &tab.at("default");
      else
        throw std::invalid_argument("profile file: window '" + label +
                                    "' missing and no default given");
      t[h] = static_cast<std::uint8_t>(
          index_of_name(names, cell->get<std::string>(), "profile table action"));
    }
    return MixedStrategy::vertex(player, set.count(), set.index_of(t));
  }
  throw std::invalid_argument("profile file: player entry needs weights, pure_index, or table");
}

}  // namespace

StrategyProfile profile_from_json(const ValueEngine& engine, const json& j) {
  const json& arr = j.is_array() ? j : j.at("strategies");
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(engine.players()))
    throw std::invalid_argument("profile file: need one entry per player");
  StrategyProfile pi(engine.players());
  std::vector<bool> seen(engine.players(), false);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const json& e = arr[k];
    const int player = e.contains("player") ? e.at("player").get<int>() : static_cast<int>(k);
    if (player < 0 || player >= engine.players() || seen[player])
      throw std::invalid_argument("profile file: bad or duplicate player index");
    seen[player] = true;
    pi[player] = strategy_from_entry(engine, player, e);
  }
  engine.validate_profile(pi);
  return pi;
}

StrategyProfile load_profile(const ValueEngine& engine, const std::string& path) {
  return profile_from_json(engine, json::parse(read_text(path)));
}

void save_profile(const ValueEngine& engine, const StrategyProfile& pi, const std::string& path) {
  write_text(path, profile_to_json(engine, pi).dump(2) + "\n");
}

// --------------------------------------------------------------------------
// behavioural tables
// --------------------------------------------------------------------------

std::string public_window_label(const BehaviouralEngine& engine, int window_id) {
  const auto& game = engine.spec().game;
  std::string out;
  const std::vector<int> entries = engine.windows().entries(window_id);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k) out += ';';
    for (int i = 0; i < game.players; ++i)
      out += game.action_names[i][game.profiles.digit(entries[k], i)];
  }
  return out;
}

json behavioural_to_json(const BehaviouralEngine& engine, const BehaviouralProfile& pi) {
  engine.validate(pi);
  json arr = json::array();
  for (int i = 0; i < engine.players(); ++i) {
    json rows;
    for (int h = 0; h < engine.history_count(); ++h)
      rows[public_window_label(engine, h)] = pi.cond[i][h];
    json e;
    e["player"] = i;
    e["rows"] = std::move(rows);
    arr.push_back(std::move(e));
  }
  json j;
  j["players"] = engine.players();
  j["behavioural"] = std::move(arr);
  return j;
}

BehaviouralProfile behavioural_from_json(const BehaviouralEngine& engine, const json& j) {
  const json& arr = j.is_array() ? j : j.at("behavioural");
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(engine.players()))
    throw std::invalid_argument("behavioural file: need one entry per player");
  BehaviouralProfile pi;
  pi.cond.resize(engine.players());
  std::vector<bool> seen(engine.players(), false);
  for (std::size_t k = 0; k < arr.size(); ++k) {
    const json& e = arr[k];
    const int player = e.contains("player") ? e.at("player").get<int>() : static_cast<int>(k);
    if (player < 0 || player >= engine.players() || seen[player])
      throw std::invalid_argument("behavioural file: bad or duplicate player index");
    seen[player] = true;
    const json& rows = e.at("rows");
    auto& cond = pi.cond[player];
    cond.resize(engine.history_count());
    for (int h = 0; h < engine.history_count(); ++h) {
      std::vector<double> row;
      if (rows.is_array()) {
        if (rows.size() != static_cast<std::size_t>(engine.history_count()))
          throw std::invalid_argument("behavioural file: need one row per window");
        row = rows[h].get<std::vector<double>>();
      } else {
        const std::string label = public_window_label(engine, h);
        if (rows.contains(label))
          row = rows.at(label).get<std::vector<double>>();
        else if (rows.contains("default"))
          row = rows.at("default").get<std::vector<double>>();
        else
          throw std::invalid_argument("behavioural file: window '" + label +
                                      "' missing and no default given");
      }
      if (row.size() != static_cast<std::size_t>(engine.spec().game.action_counts[player]))
        throw std::invalid_argument("behavioural file: row arity mismatch");
      normalize_weights(row, "behavioural row");
      cond[h] = std::move(row);
    }
  }
  engine.validate(pi);
  return pi;
}

BehaviouralProfile load_behavioural(const BehaviouralEngine& engine, const std::string& path) {
  return behavioural_from_json(engine, json::parse(read_text(path)));
}

// --------------------------------------------------------------------------
// CSV emitters
// --------------------------------------------------------------------------

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "n,player,component,weight\n";
  for (std::size_t k = 0; k < traj.profiles.size(); ++k) {
    const long n = traj.steps[k].n;
    for (std::size_t i = 0; i < traj.profiles[k].size(); ++i)
      for (std::size_t c = 0; c < traj.profiles[k][i].w.size(); ++c)
        os << n << ',' << i << ',' << c << ',' << fmt17(traj.profiles[k][i].w[c]) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t nv = traj.steps.empty() ? 0 : traj.steps.front().values.size();
  os << "n,gradient_norm,distance_to_target";
  for (std::size_t i = 0; i < nv; ++i) os << ",value_" << i;
  os << '\n';
  for (const TrajectoryStep& s : traj.steps) {
    os << s.n << ',' << fmt17(s.grad_norm) << ',' << fmt17(s.dist_to_target);
    for (std::size_t i = 0; i < nv; ++i)
      os << ',' << fmt17(i < s.values.size() ? s.values[i] : 0.0);
    os << '\n';
  }
}

void write_basin_csv(std::ostream& os, const BasinResult& res) {
  os << "seed,converged,final_distance,episodes_used\n";
  for (long k = 0; k < res.seeds; ++k)
    os << k << ',' << (res.final_distance[k] < res.threshold ? 1 : 0) << ','
       << fmt17(res.final_distance[k]) << ',' << res.episodes_used[k] << '\n';
}

void write_episode_csv(std::ostream& os, const RepeatedGameSpec& spec, const Episode& ep) {
  const int players = spec.game.players;
  os << "period";
  for (int i = 0; i < players; ++i) os << ",action_" << i;
  for (int i = 0; i < players; ++i) os << ",signal_" << i;
  for (int i = 0; i < players; ++i) os << ",reward_" << i;
  os << '\n';
  for (int t = 0; t < ep.periods(); ++t) {
    os << (t + 1);
    for (int i = 0; i < players; ++i)
      os << ',' << spec.game.action_names[i][ep.actions[t][i]];
    for (int i = 0; i < players; ++i)
      os << ','
         << spec.monitoring.signal_names[i][spec.monitoring.signal_of(ep.signals[t], i)];
    for (int i = 0; i < players; ++i) os << ',' << fmt17(ep.rewards[t][i]);
    os << '\n';
  }
}

void write_diagnostics_csv(std::ostream& os, const NoiseDiagnostics& d) {
  os << "# estimator_variant=" << to_string(d.variant) << '\n';
  os << "# samples_per_step=" << d.samples_per_step << " p=" << fmt17(d.p_used)
     << " l_sigma=" << fmt17(d.l_sigma) << " l_b=" << fmt17(d.l_b)
     << " sigma_ok=" << (d.sigma_ok ? 1 : 0) << " bias_ok=" << (d.bias_ok ? 1 : 0) << '\n';
  os << "n,second_moment,bias_matched,bias_true\n";
  for (std::size_t k = 0; k < d.steps.size(); ++k)
    os << d.steps[k] << ',' << fmt17(d.second_moment[k]) << ',' << fmt17(d.bias_matched[k])
       << ',' << fmt17(d.bias_true[k]) << '\n';
}

void write_meta_game(std::ostream& os, const ValueEngine& engine, const MetaGame& meta) {
  const int players = engine.players();
  os << "meta-game players=" << players << '\n';
  for (int i = 0; i < players; ++i) {
    const auto& set = engine.strategies(i);
    const auto& names = engine.spec().game.action_names[i];
    os << "player " << i << " windows=" << set.histories() << " strategies=" << set.count()
       << '\n';
    for (int h = 0; h < set.histories(); ++h)
      os << "window " << h << " \"" << history_label(engine, i, h) << "\"\n";
    for (std::size_t s = 0; s < set.count(); ++s) {
      os << "strategy " << s << ':';
      for (int h = 0; h < set.histories(); ++h) os << ' ' << names[set.action_at(s, h)];
      os << '\n';
    }
  }
  const std::size_t profiles = meta.joint.count();
  os << "values profiles=" << profiles << '\n';
  for (std::size_t p = 0; p < profiles; ++p) {
    for (int i = 0; i < players; ++i) os << meta.joint.digit(p, i) << ' ';
    for (int i = 0; i < players; ++i) {
      os << fmt17(meta.payoff[i][p]);
      os << (i + 1 < players ? ' ' : '\n');
    }
  }
}

json make_manifest(const json& config_snapshot, std::uint64_t master_seed,
                   const json& seed_schedule) {
  json j;
  j["version"] = kVersion;
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc;
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  j["created_utc"] = buf;
  j["master_seed"] = master_seed;
  j["seed_derivation"] = "derive_seed(master, task) = splitmix64(master xor splitmix64(task + 1))";
  j["seed_schedule"] = seed_schedule;
  j["config"] = config_snapshot;
  return j;
}

}  // namespace qrd::io

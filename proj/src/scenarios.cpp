#include "qrd/scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace qrd {

namespace {

struct ParsedName {
  std::string base;
  std::vector<double> args;
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

ParsedName parse_name(const std::string& text) {
  ParsedName out;
  const std::string t = trim(text);
  const std::size_t open = t.find('(');
  if (open == std::string::npos) {
    out.base = t;
    return out;
  }
  if (t.back() != ')')
    throw std::invalid_argument("scenario '" + text + "': missing closing parenthesis");
  out.base = trim(t.substr(0, open));
  const std::string inner = t.substr(open + 1, t.size() - open - 2);
  if (trim(inner).empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = inner.find(',', start);
    const std::string tok =
        trim(comma == std::string::npos ? inner.substr(start) : inner.substr(start, comma - start));
    try {
      std::size_t used = 0;
      out.args.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::invalid_argument("scenario '" + text + "': bad numeric argument '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Pure table as a vertex of the enumerated mixed simplex.
MixedStrategy vertex_of_table(const ValueEngine& engine, int player,
                              const std::vector<std::uint8_t>& table) {
  const auto& set = engine.strategies(player);
  return MixedStrategy::vertex(player, set.count(), set.index_of(table));
}

// Grim trigger under perfect monitoring: cooperate exactly on windows whose
// every entry is (C, the (C,..,C) profile announcement); defect otherwise.
MixedStrategy grim_strategy(const ValueEngine& engine, int player) {
  const auto& hs = engine.histories(player);
  std::vector<std::uint8_t> table(hs.count(), 1);
  for (int h = 0; h < hs.count(); ++h) {
    const auto entries = hs.history(h).entries;
    const bool clean = std::all_of(entries.begin(), entries.end(),
                                   [](const std::pair<int, int>& e) {
                                     return e.first == 0 && e.second == 0;
                                   });
    if (clean) table[h] = 0;
  }
  return vertex_of_table(engine, player, table);
}

MixedStrategy constant_strategy(const ValueEngine& engine, int player, std::uint8_t action) {
  const auto& hs = engine.histories(player);
  return vertex_of_table(engine, player, std::vector<std::uint8_t>(hs.count(), action));
}

// A.2.2 one-recall trigger: C after the empty window, (C,c), and (D,d);
// D after (C,d) and (D,c).
MixedStrategy noisy_reference_strategy(const ValueEngine& engine, int player) {
  const auto& hs = engine.histories(player);
  std::vector<std::uint8_t> table(hs.count(), 1);
  for (int h = 0; h < hs.count(); ++h) {
    const auto entries = hs.history(h).entries;
    if (entries.empty()) {
      table[h] = 0;
    } else if (entries.size() == 1) {
      table[h] = (entries[0].first == entries[0].second) ? 0 : 1;
    }
  }
  return vertex_of_table(engine, player, table);
}

RepeatedGameSpec apply_overrides(RepeatedGameSpec spec, const double* delta_override,
                                 const std::vector<int>* recall_override) {
  if (delta_override) spec.delta = *delta_override;
  if (recall_override) {
    if (recall_override->size() == 1)
      spec.recall.assign(spec.game.players, recall_override->front());
    else
      spec.recall = *recall_override;
  }
  spec.validate();
  return spec;
}

}  // namespace

Scenario load_scenario(const std::string& text, const double* delta_override,
                       const std::vector<int>* recall_override) {
  const ParsedName parsed = parse_name(text);
  Scenario sc;

  if (parsed.base == "pd_standard" || parsed.base == "matching_pennies") {
    if (!parsed.args.empty())
      throw std::invalid_argument("scenario " + parsed.base + " takes no arguments");
    sc.name = parsed.base;
    RepeatedGameSpec spec;
    if (parsed.base == "pd_standard") {
      spec.game = StageGame::make({2, 2}, {{2, 0, 3, 1}, {2, 3, 0, 1}}, {{"C", "D"}, {"C", "D"}});
    } else {
      spec.game =
          StageGame::make({2, 2}, {{1, -1, -1, 1}, {-1, 1, 1, -1}}, {{"H", "T"}, {"H", "T"}});
    }
    spec.monitoring = perfect_monitoring(spec.game);
    spec.delta = 0.0;
    spec.recall = {0, 0};
    sc.spec = apply_overrides(std::move(spec), delta_override, recall_override);

    ValueEngine engine(sc.spec);
    if (parsed.base == "pd_standard") {
      sc.references.emplace_back(
          "all_d", StrategyProfile{constant_strategy(engine, 0, 1), constant_strategy(engine, 1, 1)});
      if (*std::min_element(sc.spec.recall.begin(), sc.spec.recall.end()) >= 1)
        sc.references.emplace_back(
            "grim", StrategyProfile{grim_strategy(engine, 0), grim_strategy(engine, 1)});
    } else {
      sc.references.emplace_back(
          "uniform",
          StrategyProfile{MixedStrategy::uniform(0, engine.strategies(0).count()),
                          MixedStrategy::uniform(1, engine.strategies(1).count())});
    }
    return sc;
  }

  if (parsed.base == "pd_variant_noisy") {
    std::vector<double> eps = parsed.args;
    if (eps.empty()) eps = {0.0, 0.0, 0.0};
    if (eps.size() != 3)
      throw std::invalid_argument("scenario pd_variant_noisy needs 3 arguments (e1,e2,e3)");
    double total = 0.0;
    for (double e : eps) {
      if (!(e >= 0.0 && e < 1.0))
        throw std::invalid_argument("pd_variant_noisy: eps must lie in [0,1)");
      total += e;
    }
    if (total >= 1.0) throw std::invalid_argument("pd_variant_noisy: eps sum must be < 1");

    std::string canon = "pd_variant_noisy(";
    for (int k = 0; k < 3; ++k) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%g", eps[k]);
      canon += buf;
      canon += (k < 2 ? "," : ")");
    }
    sc.name = canon;

    RepeatedGameSpec spec;
    spec.game = StageGame::make({2, 2}, {{4, 0, 5, 2}, {4, 5, 0, 2}}, {{"C", "D"}, {"C", "D"}});
    // joint signals (z1,z2), player-major: 0=(c,c) 1=(c,d) 2=(d,c) 3=(d,d);
    // z_i is player i's noisy reading of the opponent's action
    std::vector<std::vector<double>> kernel = {
        {1.0 - eps[0] - eps[1] - eps[2], eps[1], eps[0], eps[2]},  // after (C,C)
        {0, 0, 1, 0},                                              // after (C,D): (d,c)
        {0, 1, 0, 0},                                              // after (D,C): (c,d)
        {0, 0, 0, 1},                                              // after (D,D): (d,d)
    };
    spec.monitoring =
        MonitoringStructure::make(spec.game, {2, 2}, std::move(kernel), {{"c", "d"}, {"c", "d"}});
    spec.delta = 0.9;
    spec.recall = {1, 1};
    sc.spec = apply_overrides(std::move(spec), delta_override, recall_override);

    ValueEngine engine(sc.spec);
    sc.references.emplace_back(
        "all_d", StrategyProfile{constant_strategy(engine, 0, 1), constant_strategy(engine, 1, 1)});
    if (sc.spec.recall == std::vector<int>{1, 1})
      sc.references.emplace_back("reference",
                                 StrategyProfile{noisy_reference_strategy(engine, 0),
                                                 noisy_reference_strategy(engine, 1)});
    return sc;
  }

  throw std::invalid_argument("unknown scenario '" + parsed.base +
                              "' (expected pd_standard, pd_variant_noisy(e1,e2,e3), "
                              "matching_pennies)");
}

const StrategyProfile* find_reference(const Scenario& sc, const std::string& name) {
  for (const auto& [n, p] : sc.references)
    if (n == name) return &p;
  return nullptr;
}

}  // namespace qrd

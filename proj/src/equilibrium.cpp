#include "qrd/equilibrium.hpp"

#include <algorithm>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qrd {

namespace {

constexpr double kGainTol = 1e-9;
constexpr double kInnerTol = 1e-12;

void scan_gains(const std::vector<std::vector<double>>& rows, const StrategyProfile& pi,
                EquilibriumReport& rep) {
  rep.value.resize(rows.size());
  rep.worst_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double v = 0.0;
    for (std::size_t a = 0; a < rows[i].size(); ++a) v += pi[i].w[a] * rows[i][a];
    rep.value[i] = v;
    for (std::size_t a = 0; a < rows[i].size(); ++a) {
      double gain = rows[i][a] - v;
      if (gain > rep.worst_gain) {
        rep.worst_gain = gain;
        rep.worst_player = static_cast<int>(i);
        rep.worst_strategy = a;
      }
      if (gain < -kGainTol) rep.min_losing_margin = std::min(rep.min_losing_margin, -gain);
    }
  }
  rep.is_equilibrium = rep.worst_gain <= kGainTol;
  // Strict without class analysis: every deviation loses outright. A vertex
  // profile's own pure strategy is the profile, not a deviation, so it is
  // exempt from the tie scan.
  rep.is_strict = rep.is_equilibrium;
  for (std::size_t i = 0; i < rows.size() && rep.is_strict; ++i)
    for (std::size_t a = 0; a < rows[i].size(); ++a)
      if (pi[i].w[a] != 1.0 && rows[i][a] - rep.value[i] >= -kGainTol) {
        rep.is_strict = false;
        break;
      }
}

}  // namespace

EquilibriumReport check_equilibrium(const MetaGame& meta, const StrategyProfile& pi) {
  EquilibriumReport rep;
  scan_gains(deviation_rows(meta, pi), pi, rep);
  return rep;
}

EquilibriumReport check_strict(const ValueEngine& engine, const MetaGame& meta,
                               const StrategyProfile& pi) {
  engine.validate_profile(pi);
  auto rows = deviation_rows(meta, pi);
  EquilibriumReport rep;
  scan_gains(rows, pi, rep);

  ClassAnalysis ca = analyze_class(engine, pi);
  auto deviation_in_class = [&](int i, std::size_t e) {
    StrategyProfile dev = pi;
    dev[static_cast<std::size_t>(i)] =
        MixedStrategy::vertex(i, engine.strategies(i).count(), e);
    return same_class(engine, analyze_class(engine, dev), ca);
  };

  rep.is_strict = rep.is_equilibrium;
  for (std::size_t i = 0; i < rows.size() && rep.is_strict; ++i)
    for (std::size_t a = 0; a < rows[i].size(); ++a) {
      double gain = rows[i][a] - rep.value[i];
      if (gain >= -kGainTol && !deviation_in_class(static_cast<int>(i), a)) {
        rep.is_strict = false;
        break;
      }
    }
  if (rep.worst_player >= 0)
    rep.worst_in_class = deviation_in_class(rep.worst_player, rep.worst_strategy);
  return rep;
}

VariationalReport check_variational(const ValueEngine& engine, const MetaGame& meta,
                                    const StrategyProfile& pi, double q, double epsilon,
                                    int sample_count, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("check_variational: epsilon must be > 0");
  if (sample_count < 1) throw std::invalid_argument("check_variational: sample_count < 1");
  engine.validate_profile(pi);
  VariationalReport rep;

  // C'(i): the linear form <v, pi' - pi> is maximised at a vertex per player
  auto v0 = q_gradient(meta, pi, q);
  rep.c1_value = 0.0;
  double best_term = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v0.size(); ++i) {
    double inner = 0.0, mx = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t a = 0; a < v0[i].size(); ++a) {
      inner += v0[i][a] * pi[i].w[a];
      if (v0[i][a] > mx) {
        mx = v0[i][a];
        arg = a;
      }
    }
    rep.c1_value += mx - inner;
    if (mx - inner > best_term) {
      best_term = mx - inner;
      rep.c1_player = static_cast<int>(i);
      rep.c1_vertex = arg;
    }
  }
  rep.c1_holds = rep.c1_value <= kGainTol;

  // C'(ii): epsilon-ladder of ball samples, class members excluded
  ClassAnalysis ca = analyze_class(engine, pi);
  for (int rung = 0; rung < 3; ++rung) {
    double eps = epsilon / static_cast<double>(1 << rung);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rung)));
    std::size_t informative = 0, excluded = 0;
    double worst = -std::numeric_limits<double>::infinity();
    bool violated = false;
    for (int s = 0; s < sample_count; ++s) {
      StrategyProfile x = sample_ball_profile(pi, eps, rng);
      if (class_distance(engine, analyze_class(engine, x), ca) == 0.0) {
        ++excluded;
        continue;
      }
      ++informative;
      auto v = q_gradient(meta, x, q);
      double inner = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t a = 0; a < v[i].size(); ++a)
          inner += v[i][a] * (x[i].w[a] - pi[i].w[a]);
      worst = std::max(worst, inner);
      if (inner >= -kInnerTol) {  // rung failed; try closer to pi
        violated = true;
        break;
      }
    }
    rep.c2_worst = worst;
    rep.c2_samples = informative;
    rep.c2_excluded = excluded;
    rep.epsilon_used = eps;
    if (!violated && informative > 0) {
      rep.c2_holds = true;
      break;
    }
  }
  return rep;
}

RepeatedGameSpec random_small_spec(Rng& rng) {
  std::vector<std::vector<double>> pay(2, std::vector<double>(4));
  for (auto& row : pay)
    for (double& x : row) x = rng.uniform(-1.0, 1.0);
  StageGame game = StageGame::make({2, 2}, pay);
  int recall = rng.uniform_int(2);
  static const double deltas[3] = {0.0, 0.3, 0.6};
  double delta = deltas[rng.uniform_int(3)];
  RepeatedGameSpec spec;
  spec.game = game;
  spec.monitoring = perfect_monitoring(spec.game);
  spec.delta = delta;
  spec.recall = {recall, recall};
  spec.validate();
  return spec;
}

std::string LemmaCounterexample::describe() const {
  std::ostringstream os;
  os << "lemma counterexample: trial=" << trial << " q=" << fmt17(q)
     << " delta=" << fmt17(delta) << " recall=" << recall << " profile=" << profile_index
     << "\n  payoffs:";
  for (const auto& row : payoffs) {
    os << " [";
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << fmt17(row[k]);
    os << "]";
  }
  os << "\n  check_strict: eq=" << eq.is_equilibrium << " strict=" << eq.is_strict
     << " worst_gain=" << fmt17(eq.worst_gain) << " (player " << eq.worst_player
     << ", strategy " << eq.worst_strategy << ")"
     << "\n  variational: c1=" << var.c1_holds << " (value " << fmt17(var.c1_value)
     << ") c2=" << var.c2_holds << " (worst " << fmt17(var.c2_worst) << ", samples "
     << var.c2_samples << ", epsilon " << fmt17(var.epsilon_used) << ")";
  return os.str();
}

LemmaCrossValidation cross_validate_lemma(const SpecGenerator& gen, long trials,
                                          int sample_count, double epsilon,
                                          std::uint64_t seed, Parallel par) {
  if (trials < 1) throw std::invalid_argument("cross_validate_lemma: trials < 1");
  LemmaCrossValidation out;
  out.trials = trials;
  std::vector<long> checked(static_cast<std::size_t>(trials), 0);
  std::vector<long> strict(static_cast<std::size_t>(trials), 0);
  std::vector<long> initial(static_cast<std::size_t>(trials), 0);
  std::vector<std::vector<LemmaCounterexample>> confirmed(static_cast<std::size_t>(trials));

#pragma omp parallel for schedule(dynamic) if (par == Parallel::omp)
  for (long t = 0; t < trials; ++t) {
    std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    Rng rng(trial_seed);
    RepeatedGameSpec spec = gen(rng);
    double q = (t % 2 == 0) ? 0.0 : 1.0;
    ValueEngine engine(spec);
    engine.prime_pure_cache(Parallel::serial);  // trials already run concurrently
    MetaGame meta = build_meta_game(engine, Parallel::serial);
    std::size_t joints = meta.joint.count();
    for (std::size_t e = 0; e < joints; ++e) {
      StrategyProfile prof;
      for (int i = 0; i < engine.players(); ++i)
        prof.push_back(MixedStrategy::vertex(
            i, engine.strategies(i).count(),
            static_cast<std::size_t>(meta.joint.digit(e, i))));
      EquilibriumReport eq = check_strict(engine, meta, prof);
      VariationalReport var = check_variational(
          engine, meta, prof, q, epsilon, sample_count,
          derive_seed(trial_seed, 1000 + static_cast<std::uint64_t>(e)));
      ++checked[static_cast<std::size_t>(t)];
      if (eq.is_strict) ++strict[static_cast<std::size_t>(t)];
      if (eq.is_strict == (var.c1_holds && var.c2_holds)) continue;
      // disagreement: retry with a 10x sampling budget before believing it
      VariationalReport retry = check_variational(
          engine, meta, prof, q, epsilon, sample_count * 10,
          derive_seed(trial_seed, 2000000 + static_cast<std::uint64_t>(e)));
      ++initial[static_cast<std::size_t>(t)];
      if (eq.is_strict == (retry.c1_holds && retry.c2_holds)) continue;
      LemmaCounterexample ce;
      ce.trial = static_cast<std::uint64_t>(t);
      ce.q = q;
      ce.delta = spec.delta;
      ce.recall = spec.recall[0];
      ce.payoffs = spec.game.payoffs;
      ce.profile_index = e;
      ce.eq = eq;
      ce.var = retry;
      confirmed[static_cast<std::size_t>(t)].push_back(std::move(ce));
    }
  }
  for (long t = 0; t < trials; ++t) {
    out.profiles_checked += checked[static_cast<std::size_t>(t)];
    out.strict_found += strict[static_cast<std::size_t>(t)];
    out.initial_disagreements += initial[static_cast<std::size_t>(t)];
    for (auto& ce : confirmed[static_cast<std::size_t>(t)]) {
      out.counterexamples.push_back(std::move(ce));
      ++out.confirmed_disagreements;
    }
  }
  return out;
}

}  // namespace qrd

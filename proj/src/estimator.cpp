#include "qrd/estimator.hpp"

#include <algorithm>
#include <cassert>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qrd {

void EpsilonGreedyConfig::validate(int players) const {
  dyn.validate(players);
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw std::invalid_argument("EpsilonGreedyConfig: epsilon must lie in (0, 1)");
}

std::vector<double> greedy_weights(const MixedStrategy& pi, double eps) {
  std::vector<double> w(pi.w.size());
  double u = eps / static_cast<double>(pi.w.size());
  for (std::size_t e = 0; e < w.size(); ++e) w[e] = (1.0 - eps) * pi.w[e] + u;
  return w;
}

namespace {

// per-(window, action) visit counts of player i's realised play
std::map<int, std::vector<int>> replay_counts(const ValueEngine& engine, const Episode& ep,
                                              int i) {
  const auto& hs = engine.histories(i);
  int acts = engine.spec().game.action_counts[i];
  std::map<int, std::vector<int>> counts;
  int w = 0;  // empty window
  for (int t = 0; t < ep.periods(); ++t) {
    int a = ep.actions[t][i];
    auto& c = counts.try_emplace(w, acts, 0).first->second;
    ++c[a];
    w = hs.append(w, a, engine.spec().monitoring.signal_of(ep.signals[t], i));
  }
  return counts;
}

double logsumexp(const std::vector<double>& x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace

ScoreRecord score_from_episode(const ValueEngine& engine, const StrategyProfile& pi,
                               const Episode& episode, double eps, ScoreVariant variant) {
  if (!(eps > 0.0) || !(eps < 1.0))
    throw std::invalid_argument("score_from_episode: epsilon must lie in (0, 1)");
  engine.validate_profile(pi);
  int n = engine.players();
  ScoreRecord rec;
  rec.reward.resize(n);
  rec.score.resize(n);
  for (int i = 0; i < n; ++i) {
    rec.reward[i] = episode.total_reward(i);
    const auto& strat = engine.strategies(i);
    std::size_t m = strat.count();
    int acts = strat.actions();
    auto counts = replay_counts(engine, episode, i);
    double log_explore = std::log(eps / acts);
    double log_match = std::log(1.0 - eps + eps / acts);
    std::vector<double>& sc = rec.score[i];
    sc.assign(m, 0.0);
    if (variant == ScoreVariant::pure_score) {
      // log L(e) = T log_explore + sum_w c[w][e(w)] (log_match - log_explore)
      long total = 0;
      for (auto& [w, c] : counts)
        for (int v : c) total += v;
      double base = total * log_explore, ratio = log_match - log_explore;
      std::vector<double> logl(m);
      for (std::size_t e = 0; e < m; ++e) {
        double s = base;
        for (auto& [w, c] : counts) s += c[strat.action_at(e, w)] * ratio;
        logl[e] = s;
      }
      std::vector<double> terms;
      terms.reserve(m);
      for (std::size_t e = 0; e < m; ++e)
        if (pi[i].w[e] > 0.0) terms.push_back(std::log(pi[i].w[e]) + logl[e]);
      double logden = logsumexp(terms);
      if (!std::isfinite(logden))
        throw std::runtime_error("score_from_episode: realised play has zero likelihood");
      for (std::size_t e = 0; e < m; ++e) sc[e] = std::exp(logl[e] - logden);
    } else {
      // literal per-period score with the static mixture conditional
      // pi_hat(a|w) = (1-eps) m(a|w) + eps/|A_i|, m(a|w) = sum_e pi_e 1{e(w)=a}
      for (auto& [w, c] : counts) {
        std::vector<double> marg(acts, 0.0);
        for (std::size_t e = 0; e < m; ++e)
          if (pi[i].w[e] > 0.0) marg[strat.action_at(e, w)] += pi[i].w[e];
        for (int a = 0; a < acts; ++a) {
          if (c[a] == 0) continue;
          double cond = (1.0 - eps) * marg[a] + eps / acts;
          for (std::size_t e = 0; e < m; ++e)
            if (strat.action_at(e, w) == a) sc[e] += c[a] * (1.0 - eps) / cond;
        }
      }
    }
  }
  return rec;
}

std::vector<double> reinforce(double reward, const std::vector<double>& lambda,
                              const std::vector<double>& w, double q) {
  if (!(q >= 0.0)) throw std::invalid_argument("reinforce: q must be >= 0");
  if (lambda.size() != w.size()) throw std::invalid_argument("reinforce: dimension mismatch");
  std::vector<double> what(lambda.size());
  for (std::size_t e = 0; e < lambda.size(); ++e) what[e] = reward * lambda[e];
  return q_combine(what, w, q);
}

namespace {

double l2_norm(const std::vector<std::vector<double>>& v) {
  double s = 0.0;
  for (const auto& vi : v)
    for (double x : vi) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Trajectory run_stochastic(const ValueEngine& engine, StrategyProfile pi,
                          const EpsilonGreedyConfig& cfg, std::uint64_t seed,
                          const StrategyProfile* target, const MetaGame* meta) {
  cfg.validate(engine.players());
  engine.validate_profile(pi);
  std::unique_ptr<ClassAnalysis> ct;
  if (target) ct = std::make_unique<ClassAnalysis>(analyze_class(engine, *target));
  Rng rng(seed);

  Trajectory traj;
  long last_recorded = -1;
  auto record = [&](long n, double gn, double dist) {
    if (n == last_recorded) return;
    last_recorded = n;
    TrajectoryStep st;
    st.n = n;
    st.grad_norm = gn;  // norm of the sampled estimate, not of the exact field
    st.dist_to_target = dist;
    st.step_sizes.resize(engine.players());
    for (int i = 0; i < engine.players(); ++i) st.step_sizes[i] = cfg.dyn.step_size(i, n);
    if (meta) st.values = mixed_value(*meta, pi);
    traj.steps.push_back(std::move(st));
    traj.profiles.push_back(pi);
  };

  for (long n = 0; n < cfg.dyn.max_episodes; ++n) {
    Episode ep = engine.sample_episode_greedy(pi, cfg.epsilon, rng);
    ScoreRecord sc = score_from_episode(engine, pi, ep, cfg.epsilon, cfg.variant);
    std::vector<std::vector<double>> vhat(engine.players());
    for (int i = 0; i < engine.players(); ++i)
      vhat[i] = reinforce(sc.reward[i], sc.score[i], greedy_weights(pi[i], cfg.epsilon),
                          cfg.dyn.q);
    double gn = l2_norm(vhat);
    bool recording = (n % cfg.dyn.record_every == 0);
    bool checking = cfg.dyn.stop_tolerance > 0.0 && target && (n % cfg.dyn.check_every == 0);
    double dist = std::numeric_limits<double>::quiet_NaN();
    if (target && (recording || checking))
      dist = class_distance(engine, analyze_class(engine, pi), *ct);
    if (recording) record(n, gn, dist);
    if (checking && dist < cfg.dyn.stop_tolerance) {
      record(n, gn, dist);
      traj.stopped_early = true;
      traj.steps_taken = n;
      return traj;
    }
    for (int i = 0; i < engine.players(); ++i) {
      double g = cfg.dyn.step_size(i, n);
      auto& w = pi[static_cast<std::size_t>(i)].w;
      for (std::size_t a = 0; a < w.size(); ++a) w[a] += g * vhat[static_cast<std::size_t>(i)][a];
      w = project_simplex(w);
    }
    traj.steps_taken = n + 1;
  }
  double dist = std::numeric_limits<double>::quiet_NaN();
  if (target) dist = class_distance(engine, analyze_class(engine, pi), *ct);
  record(cfg.dyn.max_episodes, 0.0, dist);
  return traj;
}

NoiseDiagnostics diagnose_noise_from_samples(
    const std::vector<std::vector<std::vector<std::vector<double>>>>& vhat,
    const std::vector<std::vector<std::vector<double>>>& matched_ref,
    const std::vector<std::vector<std::vector<double>>>& true_ref, double p) {
  if (vhat.size() < 2) throw std::invalid_argument("diagnose_noise: need at least 2 steps");
  NoiseDiagnostics diag;
  diag.p_used = p;
  std::size_t steps = vhat.size();
  auto sq_norm_diff = [](const std::vector<std::vector<double>>& a,
                         const std::vector<std::vector<double>>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t c = 0; c < a[i].size(); ++c) {
        double d = a[i][c] - b[i][c];
        s += d * d;
      }
    return s;
  };
  for (std::size_t s = 0; s < steps; ++s) {
    const auto& samples = vhat[s];
    if (samples.size() < 30) throw std::invalid_argument("diagnose_noise: need >= 30 samples");
    std::vector<std::vector<double>> mean(samples[0].size());
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i].assign(samples[0][i].size(), 0.0);
    for (const auto& v : samples)
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t c = 0; c < v[i].size(); ++c) mean[i][c] += v[i][c];
    for (auto& mi : mean)
      for (double& x : mi) x /= static_cast<double>(samples.size());
    double m2 = 0.0;
    for (const auto& v : samples) m2 += sq_norm_diff(v, mean);
    m2 /= static_cast<double>(samples.size());
    diag.steps.push_back(static_cast<long>(s) + 1);
    diag.second_moment.push_back(m2);
    diag.bias_matched.push_back(std::sqrt(sq_norm_diff(mean, matched_ref[s])));
    diag.bias_true.push_back(std::sqrt(sq_norm_diff(mean, true_ref[s])));
  }
  diag.samples_per_step = static_cast<int>(vhat[0].size());
  // least-squares slope of log y against log n
  auto slope = [&](const std::vector<double>& y) {
    double xbar = 0.0, ybar = 0.0;
    std::size_t k = y.size();
    std::vector<double> lx(k), ly(k);
    for (std::size_t s = 0; s < k; ++s) {
      lx[s] = std::log(static_cast<double>(diag.steps[s]));
      ly[s] = std::log(std::max(y[s], 1e-300));
      xbar += lx[s];
      ybar += ly[s];
    }
    xbar /= k;
    ybar /= k;
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      num += (lx[s] - xbar) * (ly[s] - ybar);
      den += (lx[s] - xbar) * (lx[s] - xbar);
    }
    return den > 0.0 ? num / den : 0.0;
  };
  diag.l_sigma = 0.5 * slope(diag.second_moment);  // E||U||^2 ~ n^(2 l_sigma)
  diag.l_b = -slope(diag.bias_true);               // ||b^n|| ~ n^(-l_b)
  diag.sigma_ok = (p - diag.l_sigma > 0.5);
  diag.bias_ok = (p + diag.l_b > 1.0);
  return diag;
}

NoiseDiagnostics diagnose_noise(const ValueEngine& engine, const MetaGame& meta,
                                const std::vector<StrategyProfile>& pis, int samples_per_step,
                                const EpsilonGreedyConfig& cfg, std::uint64_t seed,
                                Parallel par) {
  cfg.validate(engine.players());
  if (pis.size() < 2) throw std::invalid_argument("diagnose_noise: need at least 2 steps");
  if (samples_per_step < 30) throw std::invalid_argument("diagnose_noise: need >= 30 samples");
  for (const auto& pi : pis) engine.validate_profile(pi);

  // exact q-gradient of the eps-executed value: same tensor contraction as the
  // plain meta-game, entries from greedy_values_of
  MetaGame gmeta;
  gmeta.counts = meta.counts;
  gmeta.joint = meta.joint;
  gmeta.payoff.assign(meta.payoff.size(),
                      std::vector<double>(meta.joint.count(), 0.0));
  std::int64_t total = static_cast<std::int64_t>(meta.joint.count());
#pragma omp parallel for schedule(dynamic, 16) if (par == Parallel::omp)
  for (std::int64_t j = 0; j < total; ++j) {
    auto v = engine.greedy_values_of(static_cast<std::size_t>(j), cfg.epsilon);
    for (int i = 0; i < engine.players(); ++i) gmeta.payoff[i][static_cast<std::size_t>(j)] = v[i];
  }

  std::size_t steps = pis.size();
  std::vector<std::vector<std::vector<double>>> matched(steps), truth(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    auto rows = deviation_rows(gmeta, pis[s]);
    matched[s].resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      matched[s][i] = q_combine(rows[i], greedy_weights(pis[s][i], cfg.epsilon), cfg.dyn.q);
    truth[s] = q_gradient(meta, pis[s], cfg.dyn.q);
  }

  std::vector<std::vector<std::vector<std::vector<double>>>> vhat(
      steps, std::vector<std::vector<std::vector<double>>>(samples_per_step));
  std::int64_t tasks = static_cast<std::int64_t>(steps) * samples_per_step;
#pragma omp parallel for schedule(dynamic, 8) if (par == Parallel::omp)
  for (std::int64_t t = 0; t < tasks; ++t) {
    std::size_t s = static_cast<std::size_t>(t) / samples_per_step;
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    Episode ep = engine.sample_episode_greedy(pis[s], cfg.epsilon, rng);
    ScoreRecord sc = score_from_episode(engine, pis[s], ep, cfg.epsilon, cfg.variant);
    std::vector<std::vector<double>> v(engine.players());
    for (int i = 0; i < engine.players(); ++i)
      v[i] = reinforce(sc.reward[i], sc.score[i], greedy_weights(pis[s][i], cfg.epsilon),
                       cfg.dyn.q);
    vhat[s][static_cast<std::size_t>(t) % samples_per_step] = std::move(v);
  }
  NoiseDiagnostics diag = diagnose_noise_from_samples(vhat, matched, truth, cfg.dyn.p);
  diag.variant = cfg.variant;
  return diag;
}

}  // namespace qrd

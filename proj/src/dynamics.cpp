#include "qrd/dynamics.hpp"

#include <algorithm>
#include <cassert>

namespace qrd {

void QReplicatorConfig::validate(int players) const {
  if (!(q >= 0.0)) throw std::invalid_argument("QReplicatorConfig: q must be >= 0");
  if (gamma.empty() || (gamma.size() != 1 && gamma.size() != static_cast<std::size_t>(players)))
    throw std::invalid_argument("QReplicatorConfig: gamma must have 1 or player_count entries");
  for (double g : gamma)
    if (!(g >= 0.0) || !std::isfinite(g))  // zero is a legal null step
      throw std::invalid_argument("QReplicatorConfig: gamma entries must be nonnegative");
  if (!(p > 0.5) || !(p <= 1.0))
    throw std::invalid_argument("QReplicatorConfig: p must lie in (1/2, 1]");
  if (!(m > 0.0)) throw std::invalid_argument("QReplicatorConfig: m must be positive");
  if (max_episodes < 0) throw std::invalid_argument("QReplicatorConfig: max_episodes < 0");
  if (record_every < 1 || check_every < 1)
    throw std::invalid_argument("QReplicatorConfig: record_every/check_every must be >= 1");
}

std::vector<double> q_combine(const std::vector<double>& row, const std::vector<double>& w,
                              double q) {
  assert(row.size() == w.size());
  double norm = 0.0, avg = 0.0;
  for (std::size_t a = 0; a < row.size(); ++a) {
    double wq = pow_q(w[a], q);
    norm += wq;
    avg += wq * row[a];
  }
  assert(norm > 0.0);  // 0^0 = 1 covers q = 0; q > 0 has some w_a > 0 on the simplex
  avg /= norm;
  std::vector<double> out(row.size());
  for (std::size_t a = 0; a < row.size(); ++a) out[a] = pow_q(w[a], q) * (row[a] - avg);
  return out;
}

std::vector<std::vector<double>> q_gradient(const MetaGame& meta, const StrategyProfile& pi,
                                            double q) {
  if (!(q >= 0.0)) throw std::invalid_argument("q_gradient: q must be >= 0");
  auto rows = deviation_rows(meta, pi);
  std::vector<std::vector<double>> v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = q_combine(rows[i], pi[i].w, q);
  return v;
}

std::vector<double> project_simplex(const std::vector<double>& x) {
  if (!all_finite(x)) throw std::invalid_argument("project_simplex: non-finite input");
  std::vector<double> s(x);
  std::sort(s.begin(), s.end(), std::greater<double>());
  // largest k with s_k - (sum_{j<=k} s_j - 1)/k > 0
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] - theta, 0.0);
  return out;
}

StrategyProfile sample_ball_profile(const StrategyProfile& center, double radius, Rng& rng) {
  std::size_t dim = 0;
  for (const auto& c : center) dim += c.w.size();
  std::vector<double> g(dim);
  double nrm = 0.0;
  for (double& v : g) {
    v = rng.normal();
    nrm += v * v;
  }
  nrm = std::sqrt(nrm);
  if (nrm <= 0.0) nrm = 1.0;
  double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
  StrategyProfile out = center;
  std::size_t k = 0;
  for (auto& c : out) {
    for (double& w : c.w) w += r * g[k++] / nrm;
    c.w = project_simplex(c.w);
  }
  return out;
}

namespace {

double l2_norm(const std::vector<std::vector<double>>& v) {
  double s = 0.0;
  for (const auto& vi : v)
    for (double x : vi) s += x * x;
  return std::sqrt(s);
}

}  // namespace

Trajectory run_exact(const ValueEngine& engine, const MetaGame& meta, StrategyProfile pi,
                     const QReplicatorConfig& cfg, const StrategyProfile* target) {
  cfg.validate(engine.players());
  engine.validate_profile(pi);
  std::unique_ptr<ClassAnalysis> ct;
  if (target) ct = std::make_unique<ClassAnalysis>(analyze_class(engine, *target));

  Trajectory traj;
  long last_recorded = -1;
  auto record = [&](long n, double gn, double dist) {
    if (n == last_recorded) return;
    last_recorded = n;
    TrajectoryStep st;
    st.n = n;
    st.grad_norm = gn;
    st.dist_to_target = dist;
    st.step_sizes.resize(engine.players());
    for (int i = 0; i < engine.players(); ++i) st.step_sizes[i] = cfg.step_size(i, n);
    st.values = mixed_value(meta, pi);
    traj.steps.push_back(std::move(st));
    traj.profiles.push_back(pi);
  };

  for (long n = 0; n < cfg.max_episodes; ++n) {
    auto v = q_gradient(meta, pi, cfg.q);
    double gn = l2_norm(v);
    bool recording = (n % cfg.record_every == 0);
    bool checking = cfg.stop_tolerance > 0.0 && (target ? (n % cfg.check_every == 0) : true);
    double dist = std::numeric_limits<double>::quiet_NaN();
    if (target && (recording || checking))
      dist = class_distance(engine, analyze_class(engine, pi), *ct);
    if (recording) record(n, gn, dist);
    if (checking && (target ? dist < cfg.stop_tolerance : gn < cfg.stop_tolerance)) {
      record(n, gn, dist);
      traj.stopped_early = true;
      traj.steps_taken = n;
      return traj;
    }
    for (int i = 0; i < engine.players(); ++i) {
      double g = cfg.step_size(i, n);
      auto& w = pi[static_cast<std::size_t>(i)].w;
      for (std::size_t a = 0; a < w.size(); ++a) w[a] += g * v[static_cast<std::size_t>(i)][a];
      w = project_simplex(w);
    }
    traj.steps_taken = n + 1;
  }
  auto v = q_gradient(meta, pi, cfg.q);
  double dist = std::numeric_limits<double>::quiet_NaN();
  if (target) dist = class_distance(engine, analyze_class(engine, pi), *ct);
  record(cfg.max_episodes, l2_norm(v), dist);
  return traj;
}

}  // namespace qrd

#include "qrd/behavioural.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace qrd {

namespace {

constexpr int kStateCap = 200000;

// row-expected rewards and the transition matrix under pi
void fill_system(const BehaviouralEngine& engine, const BehaviouralProfile& pi,
                 Eigen::MatrixXd& m, Eigen::MatrixXd& r) {
  const StageGame& game = engine.spec().game;
  const WindowSpace& ws = engine.windows();
  double delta = engine.spec().delta;
  int hc = engine.history_count();
  m = Eigen::MatrixXd::Identity(hc, hc);
  r = Eigen::MatrixXd::Zero(hc, game.players);
  for (int h = 0; h < hc; ++h) {
    for (std::size_t a = 0; a < game.num_profiles(); ++a) {
      double w = 1.0;
      for (int j = 0; j < game.players; ++j)
        w *= pi.cond[static_cast<std::size_t>(j)][static_cast<std::size_t>(h)]
                    [static_cast<std::size_t>(game.profiles.digit(a, j))];
      if (w == 0.0) continue;
      m(h, ws.append(h, static_cast<int>(a))) -= delta * w;
      for (int i = 0; i < game.players; ++i)
        r(h, i) += w * game.payoffs[static_cast<std::size_t>(i)][a];
    }
  }
}

}  // namespace

BehaviouralEngine::BehaviouralEngine(RepeatedGameSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (!spec_.monitoring.is_perfect)
    throw std::invalid_argument("BehaviouralEngine: perfect monitoring required");
  for (int l : spec_.recall)
    if (l != spec_.recall[0])
      throw std::invalid_argument("BehaviouralEngine: common recall required");
  windows_ = WindowSpace(static_cast<int>(spec_.game.num_profiles()), spec_.recall[0]);
  if (windows_.count() > kStateCap)
    throw std::invalid_argument("BehaviouralEngine: public history space too large");
}

void BehaviouralEngine::validate(const BehaviouralProfile& pi) const {
  if (static_cast<int>(pi.cond.size()) != players())
    throw std::invalid_argument("BehaviouralProfile: player count mismatch");
  for (int i = 0; i < players(); ++i) {
    const auto& rows = pi.cond[static_cast<std::size_t>(i)];
    if (static_cast<int>(rows.size()) != history_count())
      throw std::invalid_argument("BehaviouralProfile: history count mismatch");
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != spec_.game.action_counts[static_cast<std::size_t>(i)])
        throw std::invalid_argument("BehaviouralProfile: action count mismatch");
      double sum = 0.0;
      for (double x : row) {
        if (!(x >= -1e-9) || !std::isfinite(x))
          throw std::invalid_argument("BehaviouralProfile: negative conditional weight");
        sum += x;
      }
      if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("BehaviouralProfile: conditional does not sum to one");
    }
  }
}

BehaviouralProfile BehaviouralEngine::uniform() const {
  BehaviouralProfile pi;
  for (int i = 0; i < players(); ++i) {
    std::size_t na = static_cast<std::size_t>(spec_.game.action_counts[static_cast<std::size_t>(i)]);
    pi.cond.emplace_back(static_cast<std::size_t>(history_count()),
                         std::vector<double>(na, 1.0 / static_cast<double>(na)));
  }
  return pi;
}

BehaviouralProfile BehaviouralEngine::pure(const std::vector<std::vector<int>>& tables) const {
  if (static_cast<int>(tables.size()) != players())
    throw std::invalid_argument("BehaviouralEngine::pure: player count mismatch");
  BehaviouralProfile pi;
  for (int i = 0; i < players(); ++i) {
    if (static_cast<int>(tables[static_cast<std::size_t>(i)].size()) != history_count())
      throw std::invalid_argument("BehaviouralEngine::pure: history count mismatch");
    std::size_t na = static_cast<std::size_t>(spec_.game.action_counts[static_cast<std::size_t>(i)]);
    std::vector<std::vector<double>> rows;
    for (int h = 0; h < history_count(); ++h) {
      int a = tables[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
      if (a < 0 || a >= static_cast<int>(na))
        throw std::invalid_argument("BehaviouralEngine::pure: action out of range");
      std::vector<double> row(na, 0.0);
      row[static_cast<std::size_t>(a)] = 1.0;
      rows.push_back(std::move(row));
    }
    pi.cond.push_back(std::move(rows));
  }
  return pi;
}

ContinuationValueTable continuation_values(const BehaviouralEngine& engine,
                                           const BehaviouralProfile& pi) {
  engine.validate(pi);
  Eigen::MatrixXd m, r;
  fill_system(engine, pi, m, r);
  Eigen::MatrixXd v = m.partialPivLu().solve(r);
  ContinuationValueTable out;
  out.v.assign(static_cast<std::size_t>(engine.players()),
               std::vector<double>(static_cast<std::size_t>(engine.history_count())));
  for (int i = 0; i < engine.players(); ++i)
    for (int h = 0; h < engine.history_count(); ++h)
      out.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] = v(h, i);
  return out;
}

namespace {

// value at h for player i after replacing i's conditional at h by each pure
// action, everything else fixed — one re-solve per action
std::vector<double> deviation_values_at(const BehaviouralEngine& engine,
                                        const BehaviouralProfile& pi, int i, int h) {
  const StageGame& game = engine.spec().game;
  std::size_t na = static_cast<std::size_t>(game.action_counts[static_cast<std::size_t>(i)]);
  std::vector<double> out(na);
  BehaviouralProfile work = pi;
  for (std::size_t a = 0; a < na; ++a) {
    auto& row = work.cond[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
    std::fill(row.begin(), row.end(), 0.0);
    row[a] = 1.0;
    Eigen::MatrixXd m, r;
    fill_system(engine, work, m, r);
    Eigen::VectorXd v = m.partialPivLu().solve(r.col(i));
    out[a] = v(h);
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::vector<double>>> behavioural_q_gradient(
    const BehaviouralEngine& engine, const BehaviouralProfile& pi, double q) {
  engine.validate(pi);
  if (q < 0.0) throw std::invalid_argument("behavioural_q_gradient: q must be >= 0");
  std::vector<std::vector<std::vector<double>>> grad(static_cast<std::size_t>(engine.players()));
  for (int i = 0; i < engine.players(); ++i) {
    grad[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(engine.history_count()));
    for (int h = 0; h < engine.history_count(); ++h)
      grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] =
          q_combine(deviation_values_at(engine, pi, i, h),
                    pi.cond[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)], q);
  }
  return grad;
}

SpneReport check_strict_spne(const BehaviouralEngine& engine, const BehaviouralProfile& pi) {
  engine.validate(pi);
  SpneReport rep;
  rep.values = continuation_values(engine, pi);
  for (int i = 0; i < engine.players(); ++i)
    for (int h = 0; h < engine.history_count(); ++h) {
      const auto& row = pi.cond[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)];
      std::size_t star = 0;
      for (std::size_t a = 1; a < row.size(); ++a)
        if (row[a] > row[star]) star = a;
      if (row[star] < 1.0 - 1e-9)
        throw std::invalid_argument("check_strict_spne: pure conditionals required");
      std::vector<double> dev = deviation_values_at(engine, pi, i, h);
      for (std::size_t a = 0; a < dev.size(); ++a) {
        if (a == star) continue;
        double margin = dev[star] - dev[a];
        if (margin < rep.worst_margin) {
          rep.worst_margin = margin;
          rep.worst_player = i;
          rep.worst_history = h;
          rep.worst_action = static_cast<int>(a);
        }
      }
    }
  rep.is_strict = rep.worst_margin > 1e-9;
  return rep;
}

double behavioural_distance(const BehaviouralProfile& a, const BehaviouralProfile& b) {
  if (a.cond.size() != b.cond.size())
    throw std::invalid_argument("behavioural_distance: player count mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.cond.size(); ++i) {
    if (a.cond[i].size() != b.cond[i].size())
      throw std::invalid_argument("behavioural_distance: history count mismatch");
    for (std::size_t h = 0; h < a.cond[i].size(); ++h)
      d = std::max(d, tv_distance(a.cond[i][h], b.cond[i][h]));
  }
  return d;
}

BehaviouralProfile sample_behavioural_ball(const BehaviouralProfile& center, double radius,
                                           Rng& rng) {
  if (!(radius >= 0.0)) throw std::invalid_argument("sample_behavioural_ball: bad radius");
  std::size_t dim = 0;
  for (const auto& rows : center.cond)
    for (const auto& row : rows) dim += row.size();
  BehaviouralProfile out = center;
  std::vector<double> dir(dim);
  double norm2 = 0.0;
  for (double& x : dir) {
    x = rng.normal();
    norm2 += x * x;
  }
  double scale = norm2 > 0.0 ? radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) /
                                   std::sqrt(norm2)
                             : 0.0;
  std::size_t k = 0;
  for (auto& rows : out.cond)
    for (auto& row : rows) {
      for (double& x : row) x += scale * dir[k++];
      row = project_simplex(row);
    }
  return out;
}

BehaviouralTrajectory run_behavioural(const BehaviouralEngine& engine, BehaviouralProfile pi,
                                      const QReplicatorConfig& cfg,
                                      const BehaviouralProfile* target) {
  cfg.validate(engine.players());
  engine.validate(pi);
  if (target) engine.validate(*target);

  BehaviouralTrajectory traj;
  long last_recorded = -1;
  auto record = [&](long n, double gn, double dist) {
    if (n == last_recorded) return;
    last_recorded = n;
    TrajectoryStep st;
    st.n = n;
    st.grad_norm = gn;
    st.dist_to_target = dist;
    st.step_sizes.resize(static_cast<std::size_t>(engine.players()));
    for (int i = 0; i < engine.players(); ++i)
      st.step_sizes[static_cast<std::size_t>(i)] = cfg.step_size(i, n);
    ContinuationValueTable table = continuation_values(engine, pi);
    for (int i = 0; i < engine.players(); ++i)
      st.values.push_back(table.v[static_cast<std::size_t>(i)][0]);
    traj.steps.push_back(std::move(st));
    traj.profiles.push_back(pi);
  };

  for (long n = 0; n < cfg.max_episodes; ++n) {
    auto grad = behavioural_q_gradient(engine, pi, cfg.q);
    double gn = 0.0;
    for (const auto& rows : grad)
      for (const auto& row : rows)
        for (double x : row) gn += x * x;
    gn = std::sqrt(gn);
    bool recording = (n % cfg.record_every == 0);
    bool checking = cfg.stop_tolerance > 0.0 && target && (n % cfg.check_every == 0);
    double dist = std::numeric_limits<double>::quiet_NaN();
    if (target && (recording || checking)) dist = behavioural_distance(pi, *target);
    if (recording) record(n, gn, dist);
    if (checking && dist < cfg.stop_tolerance) {
      record(n, gn, dist);
      traj.stopped_early = true;
      traj.steps_taken = n;
      return traj;
    }
    for (int i = 0; i < engine.players(); ++i) {
      double g = cfg.step_size(i, n);
      auto& rows = pi.cond[static_cast<std::size_t>(i)];
      for (std::size_t h = 0; h < rows.size(); ++h) {
        for (std::size_t a = 0; a < rows[h].size(); ++a)
          rows[h][a] += g * grad[static_cast<std::size_t>(i)][h][a];
        rows[h] = project_simplex(rows[h]);
      }
    }
    traj.steps_taken = n + 1;
  }
  double dist = std::numeric_limits<double>::quiet_NaN();
  if (target) dist = behavioural_distance(pi, *target);
  record(cfg.max_episodes, 0.0, dist);
  return traj;
}

}  // namespace qrd

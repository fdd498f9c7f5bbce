#include "qrd/valuation.hpp"

#include <Eigen/Dense>

#include <map>

namespace qrd {

namespace {

constexpr int kDenseLimit = 2000;       // direct factorization up to this many states
constexpr std::size_t kStateCap = 2'000'000;

struct Triplet {
  int row, col;
  double p;
};

// Solve (I - delta T) X = R column by column; T given as triplets.
// Dense LU below kDenseLimit, damped fixed point (contraction factor delta,
// tolerance 1e-12 on the solution) above. `transposed` solves with T^T.
Eigen::MatrixXd solve_discounted(int n, double delta, const std::vector<Triplet>& t,
                                 const Eigen::MatrixXd& rhs, bool transposed) {
  if (n <= kDenseLimit) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (const auto& tr : t) {
      if (transposed)
        m(tr.col, tr.row) -= delta * tr.p;
      else
        m(tr.row, tr.col) -= delta * tr.p;
    }
    return Eigen::PartialPivLU<Eigen::MatrixXd>(m).solve(rhs);
  }
  Eigen::MatrixXd x = rhs;
  Eigen::MatrixXd next(n, rhs.cols());
  const double tol = delta > 0.0 ? 1e-12 * (1.0 - delta) / delta : 0.0;
  for (int it = 0; it < 100000; ++it) {
    next = rhs;
    for (const auto& tr : t) {
      if (transposed)
        next.row(tr.col) += delta * tr.p * x.row(tr.row);
      else
        next.row(tr.row) += delta * tr.p * x.row(tr.col);
    }
    double diff = (next - x).cwiseAbs().maxCoeff();
    x.swap(next);
    if (diff <= tol || delta == 0.0) break;
  }
  return x;
}

}  // namespace

ValueEngine::ValueEngine(RepeatedGameSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  const int n = spec_.game.players;
  std::vector<int> counts(n);
  for (int i = 0; i < n; ++i) {
    histories_.emplace_back(spec_, i);
    strategies_.emplace_back(histories_[i], spec_.game.action_counts[i], spec_.strategy_cap);
    counts[i] = static_cast<int>(strategies_[i].count());
  }
  joint_ = MixedRadix(counts);

  // joint recall states, closed under every action profile and every signal
  // in kernel support; state 0 = everyone at the empty window
  std::map<std::vector<int>, int> ids;
  std::vector<int> init(n, 0);
  ids[init] = 0;
  states_.push_back(init);
  const auto& mon = spec_.monitoring;
  for (std::size_t qi = 0; qi < states_.size(); ++qi) {
    std::vector<int> cur = states_[qi];  // copy: states_ may reallocate
    trans_.emplace_back(spec_.game.num_profiles());
    for (std::size_t a = 0; a < spec_.game.num_profiles(); ++a) {
      auto& row = trans_.back()[a];
      for (int z : mon.support[a]) {
        std::vector<int> nxt(n);
        for (int i = 0; i < n; ++i)
          nxt[i] = histories_[i].append(cur[i], spec_.game.profiles.digit(a, i),
                                        mon.joints.digit(z, i));
        auto [it, fresh] = ids.try_emplace(nxt, static_cast<int>(states_.size()));
        if (fresh) {
          states_.push_back(nxt);
          if (states_.size() > kStateCap)
            throw CapacityError("ValueEngine: joint state space too large",
                                static_cast<double>(states_.size()),
                                static_cast<double>(kStateCap));
        }
        double p = mon.kernel[a][z];
        bool merged = false;
        for (auto& tr : row)
          if (tr.next == it->second) {
            tr.prob += p;
            merged = true;
            break;
          }
        if (!merged) row.push_back({it->second, p});
      }
    }
  }
}

void ValueEngine::validate_profile(const StrategyProfile& pi) const {
  if (static_cast<int>(pi.size()) != players())
    throw std::invalid_argument("StrategyProfile: size != players");
  for (int i = 0; i < players(); ++i) {
    if (pi[i].w.size() != strategies_[i].count())
      throw std::invalid_argument("StrategyProfile: weight count != pure strategies");
    pi[i].validate();
  }
}

std::size_t ValueEngine::profile_of(int state,
                                    const std::vector<std::vector<std::uint8_t>>& tables) const {
  std::vector<int> d(players());
  for (int i = 0; i < players(); ++i) d[i] = tables[i][states_[state][i]];
  return spec_.game.profiles.index(d);
}

PureData ValueEngine::compute_pure(std::size_t joint_index, bool with_visits) const {
  const int n = players();
  std::vector<std::vector<std::uint8_t>> tables(n);
  for (int i = 0; i < n; ++i) tables[i] = strategies_[i].table(joint_.digit(joint_index, i));

  // forward closure under the profile
  std::vector<int> loc(states_.size(), -1);
  std::vector<int> order;
  loc[0] = 0;
  order.push_back(0);
  std::vector<std::size_t> act;
  for (std::size_t qi = 0; qi < order.size(); ++qi) {
    int s = order[qi];
    std::size_t a = profile_of(s, tables);
    act.push_back(a);
    for (const auto& tr : trans_[s][a])
      if (loc[tr.next] < 0) {
        loc[tr.next] = static_cast<int>(order.size());
        order.push_back(tr.next);
      }
  }
  const int ns = static_cast<int>(order.size());
  std::vector<Triplet> trip;
  Eigen::MatrixXd rhs(ns, n);
  for (int l = 0; l < ns; ++l) {
    for (const auto& tr : trans_[order[l]][act[l]]) trip.push_back({l, loc[tr.next], tr.prob});
    for (int i = 0; i < n; ++i) rhs(l, i) = spec_.game.payoffs[i][act[l]];
  }
  Eigen::MatrixXd v = solve_discounted(ns, spec_.delta, trip, rhs, false);

  PureData out;
  out.value.resize(n);
  for (int i = 0; i < n; ++i) out.value[i] = v(0, i);
  if (with_visits) {
    Eigen::MatrixXd e0 = Eigen::MatrixXd::Zero(ns, 1);
    e0(0, 0) = 1.0;
    Eigen::MatrixXd occ = solve_discounted(ns, spec_.delta, trip, e0, true);
    out.visits.resize(n);
    for (int i = 0; i < n; ++i) out.visits[i].assign(histories_[i].count(), 0.0);
    for (int l = 0; l < ns; ++l)
      for (int i = 0; i < n; ++i) out.visits[i][states_[order[l]][i]] += occ(l, 0);
  }
  return out;
}

void ValueEngine::ensure_cache() const {
  if (cache_ready_.load(std::memory_order_acquire)) return;
  std::lock_guard<std::mutex> lk(mu_);
  if (cache_ready_.load(std::memory_order_relaxed)) return;
  cache_.resize(joint_.count());
  filled_ = std::make_unique<std::atomic<std::uint8_t>[]>(joint_.count());
  for (std::size_t i = 0; i < joint_.count(); ++i) filled_[i].store(0, std::memory_order_relaxed);
  cache_ready_.store(true, std::memory_order_release);
}

const PureData& ValueEngine::pure_data(std::size_t joint_index) const {
  ensure_cache();
  if (filled_[joint_index].load(std::memory_order_acquire)) return *cache_[joint_index];
  std::lock_guard<std::mutex> lk(mu_);
  if (!filled_[joint_index].load(std::memory_order_relaxed)) {
    cache_[joint_index] = std::make_unique<PureData>(compute_pure(joint_index, true));
    filled_[joint_index].store(1, std::memory_order_release);
  }
  return *cache_[joint_index];
}

void ValueEngine::prime_pure_cache(Parallel par) const {
  ensure_cache();
  const std::int64_t total = static_cast<std::int64_t>(joint_.count());
#pragma omp parallel for schedule(dynamic, 16) if (par == Parallel::omp)
  for (std::int64_t j = 0; j < total; ++j) {
    if (filled_[j].load(std::memory_order_acquire)) continue;
    cache_[j] = std::make_unique<PureData>(compute_pure(j, true));
    filled_[j].store(1, std::memory_order_release);
  }
}

std::vector<double> ValueEngine::values_of(std::size_t joint_index) const {
  if (cache_ready_.load(std::memory_order_acquire) &&
      filled_[joint_index].load(std::memory_order_acquire))
    return cache_[joint_index]->value;
  return compute_pure(joint_index, false).value;
}

std::vector<double> ValueEngine::value_of_pure_profile(
    const std::vector<PureStrategy>& profile) const {
  if (static_cast<int>(profile.size()) != players())
    throw std::invalid_argument("value_of_pure_profile: profile size != players");
  std::vector<int> idx(players());
  for (int i = 0; i < players(); ++i) {
    if (profile[i].player != i)
      throw std::invalid_argument("value_of_pure_profile: players out of order");
    idx[i] = static_cast<int>(strategies_[i].index_of(profile[i].table));
  }
  return values_of(joint_.index(idx));
}

std::vector<double> ValueEngine::greedy_values_of(std::size_t joint_index, double eps) const {
  if (!(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("greedy_values_of: eps outside [0,1)");
  const int n = players();
  std::vector<std::vector<std::uint8_t>> tables(n);
  for (int i = 0; i < n; ++i) tables[i] = strategies_[i].table(joint_.digit(joint_index, i));

  const int ns = state_count();
  std::vector<Triplet> trip;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ns, n);
  for (int s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < spec_.game.num_profiles(); ++a) {
      double w = 1.0;
      for (int i = 0; i < n; ++i) {
        int ai = spec_.game.profiles.digit(a, i);
        int play = tables[i][states_[s][i]];
        double f = eps / spec_.game.action_counts[i] + (ai == play ? 1.0 - eps : 0.0);
        w *= f;
        if (w == 0.0) break;
      }
      if (w == 0.0) continue;
      for (int i = 0; i < n; ++i) rhs(s, i) += w * spec_.game.payoffs[i][a];
      for (const auto& tr : trans_[s][a]) trip.push_back({s, tr.next, w * tr.prob});
    }
  }
  Eigen::MatrixXd v = solve_discounted(ns, spec_.delta, trip, rhs, false);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = v(0, i);
  return out;
}

Episode ValueEngine::sample_episode(const StrategyProfile& pi, Rng& rng) const {
  validate_profile(pi);
  const int n = players();
  Episode ep;
  ep.drawn.resize(n);
  std::vector<std::vector<std::uint8_t>> tables(n);
  for (int i = 0; i < n; ++i) {
    ep.drawn[i] = rng.categorical(pi[i].w);
    tables[i] = strategies_[i].table(ep.drawn[i]);
  }
  std::vector<int> win(n, 0);
  while (true) {
    std::vector<int> a(n);
    for (int i = 0; i < n; ++i) a[i] = tables[i][win[i]];
    std::size_t p = spec_.game.profiles.index(a);
    int z = rng.categorical(spec_.monitoring.kernel[p]);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = spec_.game.payoffs[i][p];
    ep.actions.push_back(std::move(a));
    ep.signals.push_back(z);
    ep.rewards.push_back(std::move(r));
    for (int i = 0; i < n; ++i)
      win[i] = histories_[i].append(win[i], ep.actions.back()[i],
                                    spec_.monitoring.joints.digit(z, i));
    if (!(rng.uniform() < spec_.delta)) break;
  }
  return ep;
}

Episode ValueEngine::sample_episode_greedy(const StrategyProfile& pi, double eps,
                                           Rng& rng) const {
  if (!(eps >= 0.0 && eps < 1.0))
    throw std::invalid_argument("sample_episode_greedy: eps outside [0,1)");
  validate_profile(pi);
  const int n = players();
  Episode ep;
  ep.drawn.resize(n);
  std::vector<std::vector<std::uint8_t>> tables(n);
  for (int i = 0; i < n; ++i) {
    ep.drawn[i] = rng.categorical(pi[i].w);
    tables[i] = strategies_[i].table(ep.drawn[i]);
  }
  std::vector<int> win(n, 0);
  while (true) {
    std::vector<int> a(n);
    std::vector<std::uint8_t> ex(n, 0);
    for (int i = 0; i < n; ++i) {
      a[i] = tables[i][win[i]];
      if (rng.uniform() < eps) {
        a[i] = rng.uniform_int(spec_.game.action_counts[i]);
        ex[i] = 1;
      }
    }
    std::size_t p = spec_.game.profiles.index(a);
    int z = rng.categorical(spec_.monitoring.kernel[p]);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = spec_.game.payoffs[i][p];
    ep.actions.push_back(std::move(a));
    ep.signals.push_back(z);
    ep.rewards.push_back(std::move(r));
    ep.explored.push_back(std::move(ex));
    for (int i = 0; i < n; ++i)
      win[i] = histories_[i].append(win[i], ep.actions.back()[i],
                                    spec_.monitoring.joints.digit(z, i));
    if (!(rng.uniform() < spec_.delta)) break;
  }
  return ep;
}

MetaGame build_meta_game(const ValueEngine& engine, Parallel par) {
  MetaGame meta;
  const int n = engine.players();
  std::vector<int> counts(n);
  for (int i = 0; i < n; ++i) counts[i] = static_cast<int>(engine.strategies(i).count());
  meta.counts.assign(counts.begin(), counts.end());
  meta.joint = MixedRadix(counts);
  meta.payoff.assign(n, std::vector<double>(meta.joint.count()));
  const std::int64_t total = static_cast<std::int64_t>(meta.joint.count());
#pragma omp parallel for schedule(dynamic, 16) if (par == Parallel::omp)
  for (std::int64_t j = 0; j < total; ++j) {
    std::vector<double> v = engine.values_of(static_cast<std::size_t>(j));
    for (int i = 0; i < n; ++i) meta.payoff[i][j] = v[i];
  }
  return meta;
}

namespace {

void check_profile_against_meta(const MetaGame& meta, const StrategyProfile& pi) {
  if (pi.size() != meta.counts.size())
    throw std::invalid_argument("profile size != meta players");
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i].w.size() != meta.counts[i])
      throw std::invalid_argument("profile weights != meta strategy count");
    pi[i].validate();
  }
}

}  // namespace

std::vector<double> mixed_value(const MetaGame& meta, const StrategyProfile& pi) {
  check_profile_against_meta(meta, pi);
  const int n = static_cast<int>(meta.counts.size());
  std::vector<std::vector<std::size_t>> supp(n);
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * meta.counts[i + 1];
  for (int i = 0; i < n; ++i) {
    supp[i] = pi[i].support();
    if (supp[i].empty()) throw std::invalid_argument("mixed_value: empty support");
  }
  std::vector<double> u(n, 0.0);
  std::vector<std::size_t> k(n, 0);
  while (true) {
    double w = 1.0;
    std::size_t base = 0;
    for (int i = 0; i < n; ++i) {
      w *= pi[i].w[supp[i][k[i]]];
      base += supp[i][k[i]] * stride[i];
    }
    for (int i = 0; i < n; ++i) u[i] += w * meta.payoff[i][base];
    int d = n - 1;
    while (d >= 0 && ++k[d] == supp[d].size()) k[d--] = 0;
    if (d < 0) break;
  }
  return u;
}

std::vector<std::vector<double>> deviation_rows(const MetaGame& meta, const StrategyProfile& pi) {
  check_profile_against_meta(meta, pi);
  const int n = static_cast<int>(meta.counts.size());
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * meta.counts[i + 1];
  std::vector<std::vector<double>> rows(n);
  for (int i = 0; i < n; ++i) {
    rows[i].assign(meta.counts[i], 0.0);
    // odometer over the other players' supports
    std::vector<int> others;
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    std::vector<std::vector<std::size_t>> supp;
    for (int j : others) {
      supp.push_back(pi[j].support());
      if (supp.back().empty()) throw std::invalid_argument("deviation_rows: empty support");
    }
    std::vector<std::size_t> k(others.size(), 0);
    while (true) {
      double w = 1.0;
      std::size_t base = 0;
      for (std::size_t d = 0; d < others.size(); ++d) {
        int j = others[d];
        w *= pi[j].w[supp[d][k[d]]];
        base += supp[d][k[d]] * stride[j];
      }
      const double* pay = meta.payoff[i].data();
      for (std::size_t a = 0; a < meta.counts[i]; ++a)
        rows[i][a] += w * pay[base + a * stride[i]];
      if (others.empty()) break;
      int d = static_cast<int>(others.size()) - 1;
      while (d >= 0 && ++k[d] == supp[d].size()) k[d--] = 0;
      if (d < 0) break;
    }
  }
  return rows;
}

}  // namespace qrd

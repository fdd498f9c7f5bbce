#include "qrd/folk.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "qrd/lp.hpp"

namespace qrd {

namespace {

constexpr double kPayoffTol = 1e-12;

// u_i(a_i, opponents) with opponents packed by a MixedRadix over the other
// players' action counts
double payoff_at(const StageGame& game, int player, int own,
                 const std::vector<int>& opps, const MixedRadix& opp_space,
                 std::size_t opp_index) {
  std::vector<int> digits(static_cast<std::size_t>(game.players), 0);
  digits[static_cast<std::size_t>(player)] = own;
  for (std::size_t k = 0; k < opps.size(); ++k)
    digits[static_cast<std::size_t>(opps[k])] = opp_space.digit(opp_index, static_cast<int>(k));
  return game.payoffs[static_cast<std::size_t>(player)][game.profiles.index(digits)];
}

}  // namespace

double pure_minmax(const StageGame& game, int player) {
  if (player < 0 || player >= game.players) throw std::invalid_argument("pure_minmax: player");
  int na = game.action_counts[static_cast<std::size_t>(player)];
  if (game.players == 1) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < na; ++a)
      best = std::max(best, game.payoffs[static_cast<std::size_t>(player)][static_cast<std::size_t>(a)]);
    return best;
  }
  std::vector<int> opps, counts;
  for (int j = 0; j < game.players; ++j)
    if (j != player) {
      opps.push_back(j);
      counts.push_back(game.action_counts[static_cast<std::size_t>(j)]);
    }
  MixedRadix opp_space(counts);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < opp_space.count(); ++t) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < na; ++a) mx = std::max(mx, payoff_at(game, player, a, opps, opp_space, t));
    best = std::min(best, mx);
  }
  return best;
}

double mixed_minmax(const StageGame& game, int player, bool* approximate) {
  if (player < 0 || player >= game.players) throw std::invalid_argument("mixed_minmax: player");
  if (approximate) *approximate = false;
  int na = game.action_counts[static_cast<std::size_t>(player)];
  if (game.players == 1) return pure_minmax(game, player);

  if (game.players == 2) {
    // zero-sum LP: opponent picks y to minimise max_a u_i(a, y);
    // variables [y, v+, v-], value v = v+ - v- free
    int opp = 1 - player;
    std::size_t no = static_cast<std::size_t>(game.action_counts[static_cast<std::size_t>(opp)]);
    std::vector<double> c(no + 2, 0.0);
    c[no] = 1.0;
    c[no + 1] = -1.0;
    std::vector<std::vector<double>> aub;
    std::vector<double> bub;
    std::vector<int> digits(2, 0);
    for (int a = 0; a < na; ++a) {
      std::vector<double> row(no + 2, 0.0);
      for (std::size_t b = 0; b < no; ++b) {
        digits[static_cast<std::size_t>(player)] = a;
        digits[static_cast<std::size_t>(opp)] = static_cast<int>(b);
        row[b] = game.payoffs[static_cast<std::size_t>(player)][game.profiles.index(digits)];
      }
      row[no] = -1.0;
      row[no + 1] = 1.0;
      aub.push_back(std::move(row));
      bub.push_back(0.0);
    }
    std::vector<std::vector<double>> aeq(1, std::vector<double>(no + 2, 0.0));
    for (std::size_t b = 0; b < no; ++b) aeq[0][b] = 1.0;
    LpResult r = solve_lp(c, aub, bub, aeq, {1.0});
    if (r.status != LpStatus::optimal) throw std::runtime_error("mixed_minmax: LP failed");
    return r.objective;
  }

  // 3+ players: product distributions make the joint problem nonconvex;
  // alternate exact per-opponent LPs from many starts (upper bound).
  if (approximate) *approximate = true;
  std::vector<int> opps, counts;
  for (int j = 0; j < game.players; ++j)
    if (j != player) {
      opps.push_back(j);
      counts.push_back(game.action_counts[static_cast<std::size_t>(j)]);
    }
  MixedRadix opp_space(counts);

  auto br_value = [&](const std::vector<std::vector<double>>& y) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < na; ++a) {
      double v = 0.0;
      for (std::size_t t = 0; t < opp_space.count(); ++t) {
        double w = 1.0;
        for (std::size_t k = 0; k < opps.size(); ++k)
          w *= y[k][static_cast<std::size_t>(opp_space.digit(t, static_cast<int>(k)))];
        if (w > 0.0) v += w * payoff_at(game, player, a, opps, opp_space, t);
      }
      best = std::max(best, v);
    }
    return best;
  };

  auto descend = [&](std::vector<std::vector<double>> y) {
    double val = br_value(y);
    for (int sweep = 0; sweep < 100; ++sweep) {
      double before = val;
      for (std::size_t k = 0; k < opps.size(); ++k) {
        std::size_t nk = static_cast<std::size_t>(counts[k]);
        // coef[a][b] = E over the other opponents of u_i(a, b at k, rest)
        std::vector<std::vector<double>> coef(static_cast<std::size_t>(na),
                                              std::vector<double>(nk, 0.0));
        for (std::size_t t = 0; t < opp_space.count(); ++t) {
          double w = 1.0;
          for (std::size_t k2 = 0; k2 < opps.size(); ++k2)
            if (k2 != k)
              w *= y[k2][static_cast<std::size_t>(opp_space.digit(t, static_cast<int>(k2)))];
          if (w == 0.0) continue;
          std::size_t b = static_cast<std::size_t>(opp_space.digit(t, static_cast<int>(k)));
          for (int a = 0; a < na; ++a)
            coef[static_cast<std::size_t>(a)][b] += w * payoff_at(game, player, a, opps, opp_space, t);
        }
        std::vector<double> c(nk + 2, 0.0);
        c[nk] = 1.0;
        c[nk + 1] = -1.0;
        std::vector<std::vector<double>> aub;
        std::vector<double> bub;
        for (int a = 0; a < na; ++a) {
          std::vector<double> row = coef[static_cast<std::size_t>(a)];
          row.push_back(-1.0);
          row.push_back(1.0);
          aub.push_back(std::move(row));
          bub.push_back(0.0);
        }
        std::vector<std::vector<double>> aeq(1, std::vector<double>(nk + 2, 0.0));
        for (std::size_t b = 0; b < nk; ++b) aeq[0][b] = 1.0;
        LpResult r = solve_lp(c, aub, bub, aeq, {1.0});
        if (r.status != LpStatus::optimal) throw std::runtime_error("mixed_minmax: LP failed");
        y[k].assign(r.x.begin(), r.x.begin() + static_cast<std::ptrdiff_t>(nk));
        val = r.objective;
      }
      if (val > before - 1e-12) break;
    }
    return val;
  };

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < opp_space.count(); ++t) {
    std::vector<std::vector<double>> y(opps.size());
    for (std::size_t k = 0; k < opps.size(); ++k) {
      y[k].assign(static_cast<std::size_t>(counts[k]), 0.0);
      y[k][static_cast<std::size_t>(opp_space.digit(t, static_cast<int>(k)))] = 1.0;
    }
    best = std::min(best, descend(std::move(y)));
  }
  Rng rng(derive_seed(0x6d696e6dULL, static_cast<std::uint64_t>(player)));
  for (int s = 0; s < 20; ++s) {
    std::vector<std::vector<double>> y(opps.size());
    for (std::size_t k = 0; k < opps.size(); ++k) y[k] = rng.simplex(counts[k]);
    best = std::min(best, descend(std::move(y)));
  }
  return best;
}

bool in_hull(const std::vector<std::vector<double>>& points, const std::vector<double>& u,
             double tol) {
  std::size_t kc = points.size(), d = u.size();
  if (kc == 0) return false;
  for (const auto& p : points)
    if (p.size() != d) throw std::invalid_argument("in_hull: dimension mismatch");
  std::size_t nv = kc + 2 * d;
  std::vector<double> c(nv, 0.0);
  for (std::size_t j = kc; j < nv; ++j) c[j] = 1.0;
  std::vector<std::vector<double>> aeq;
  std::vector<double> beq;
  for (std::size_t dim = 0; dim < d; ++dim) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t k = 0; k < kc; ++k) row[k] = points[k][dim];
    row[kc + dim] = -1.0;
    row[kc + d + dim] = 1.0;
    aeq.push_back(std::move(row));
    beq.push_back(u[dim]);
  }
  std::vector<double> ones(nv, 0.0);
  for (std::size_t k = 0; k < kc; ++k) ones[k] = 1.0;
  aeq.push_back(std::move(ones));
  beq.push_back(1.0);
  LpResult r = solve_lp(c, {}, {}, aeq, beq);
  return r.status == LpStatus::optimal && r.objective <= tol;
}

std::string to_string(IrVariant v) {
  switch (v) {
    case IrVariant::mixed: return "W_tilde";
    case IrVariant::strict_mixed: return "W_tilde_0";
    case IrVariant::pure: return "W_bar";
  }
  return "?";
}

bool PayoffGeometry::contains(const std::vector<double>& u) const {
  if (u.size() != minmax_pure.size())
    throw std::invalid_argument("PayoffGeometry::contains: dimension mismatch");
  if (!in_hull(hull_vertices, u, 1e-9)) return false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double floor = variant == IrVariant::pure ? minmax_pure[i] : minmax_mixed[i];
    if (variant == IrVariant::strict_mixed) {
      if (!(u[i] > floor + 1e-9)) return false;
    } else {
      if (!(u[i] >= floor - 1e-9)) return false;
    }
  }
  return true;
}

PayoffGeometry feasible_ir_set(const StageGame& game, IrVariant variant) {
  PayoffGeometry g;
  g.variant = variant;
  std::vector<std::vector<double>> pts;
  for (std::size_t p = 0; p < game.num_profiles(); ++p) {
    std::vector<double> u(static_cast<std::size_t>(game.players));
    for (int i = 0; i < game.players; ++i) u[static_cast<std::size_t>(i)] = game.payoffs[static_cast<std::size_t>(i)][p];
    if (std::find(pts.begin(), pts.end(), u) == pts.end()) pts.push_back(std::move(u));
  }
  for (const auto& q : pts) {
    std::vector<std::vector<double>> others;
    for (const auto& o : pts)
      if (o != q) others.push_back(o);
    if (others.empty() || !in_hull(others, q, 1e-9)) g.hull_vertices.push_back(q);
  }
  g.minmax_mixed.resize(static_cast<std::size_t>(game.players));
  g.minmax_pure.resize(static_cast<std::size_t>(game.players));
  for (int i = 0; i < game.players; ++i) {
    bool approx = false;
    g.minmax_mixed[static_cast<std::size_t>(i)] = mixed_minmax(game, i, &approx);
    g.minmax_pure[static_cast<std::size_t>(i)] = pure_minmax(game, i);
    g.minmax_approximate = g.minmax_approximate || approx;
  }
  return g;
}

namespace {

// smallest window length making every cyclic window's successor unique
int cycle_window(const std::vector<std::size_t>& cyc) {
  int len = static_cast<int>(cyc.size());
  for (int w = 1; w <= len; ++w) {
    std::map<std::vector<std::size_t>, std::size_t> next;
    bool ok = true;
    for (int t = 0; t < len && ok; ++t) {
      std::vector<std::size_t> win(static_cast<std::size_t>(w));
      for (int s = 0; s < w; ++s) win[static_cast<std::size_t>(s)] = cyc[static_cast<std::size_t>((t - w + 1 + s + w * len) % len)];
      std::size_t nx = cyc[static_cast<std::size_t>((t + 1) % len)];
      auto it = next.find(win);
      if (it == next.end())
        next.emplace(std::move(win), nx);
      else if (it->second != nx)
        ok = false;
    }
    if (ok) return w;
  }
  return len;
}

}  // namespace

TriggerProfile build_trigger_profile(const RepeatedGameSpec& spec,
                                     const std::vector<std::vector<int>>& target_cycle,
                                     int punishment_length) {
  spec.validate();
  if (!spec.monitoring.is_perfect)
    throw std::invalid_argument("build_trigger_profile: perfect monitoring required");
  if (target_cycle.empty())
    throw std::invalid_argument("build_trigger_profile: empty target cycle");
  if (punishment_length < 1)
    throw std::invalid_argument("build_trigger_profile: punishment_length must be >= 1");
  const StageGame& game = spec.game;
  std::vector<std::size_t> cyc;
  for (const auto& prof : target_cycle) {
    if (static_cast<int>(prof.size()) != game.players)
      throw std::invalid_argument("build_trigger_profile: cycle profile arity");
    for (int i = 0; i < game.players; ++i)
      if (prof[static_cast<std::size_t>(i)] < 0 ||
          prof[static_cast<std::size_t>(i)] >= game.action_counts[static_cast<std::size_t>(i)])
        throw std::invalid_argument("build_trigger_profile: cycle action out of range");
    cyc.push_back(game.profiles.index(prof));
  }

  // punishment profile: a stage Nash profile whose opponents hold every
  // player to the pure minmax (lowest profile index when several qualify)
  std::vector<double> mm(static_cast<std::size_t>(game.players));
  for (int i = 0; i < game.players; ++i) mm[static_cast<std::size_t>(i)] = pure_minmax(game, i);
  std::size_t p_index = game.num_profiles();
  for (std::size_t p = 0; p < game.num_profiles() && p_index == game.num_profiles(); ++p) {
    bool ok = true;
    for (int j = 0; j < game.players && ok; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      std::vector<int> digits = game.profiles.decode(p);
      for (int a = 0; a < game.action_counts[static_cast<std::size_t>(j)]; ++a) {
        digits[static_cast<std::size_t>(j)] = a;
        mx = std::max(mx, game.payoffs[static_cast<std::size_t>(j)][game.profiles.index(digits)]);
      }
      ok = std::fabs(mx - mm[static_cast<std::size_t>(j)]) <= kPayoffTol &&
           game.payoffs[static_cast<std::size_t>(j)][p] >= mx - kPayoffTol;
    }
    if (ok) p_index = p;
  }
  if (p_index == game.num_profiles())
    throw std::invalid_argument(
        "build_trigger_profile: no stage Nash profile attains every pure minmax");

  int l_cyc = cycle_window(cyc);
  int l_min = *std::min_element(spec.recall.begin(), spec.recall.end());
  bool p_in_cycle = std::find(cyc.begin(), cyc.end(), p_index) != cyc.end();
  int lng = static_cast<int>(cyc.size());
  bool resume = l_min >= std::max(punishment_length + 1, l_cyc) && !p_in_cycle;
  if (!resume && l_min < std::max(1, l_cyc))
    throw CapacityError("build_trigger_profile: recall cannot encode the trigger",
                        static_cast<std::size_t>(std::max(1, l_cyc)),
                        static_cast<std::size_t>(l_min));

  ValueEngine engine(spec);
  TriggerProfile out;
  out.grim = !resume;
  out.punishment = game.profiles.decode(p_index);

  for (int i = 0; i < game.players; ++i) {
    const HistorySpace& hs = engine.histories(i);
    int li = spec.recall[static_cast<std::size_t>(i)];
    std::vector<std::uint8_t> tab(static_cast<std::size_t>(hs.count()), 0);
    for (int h = 0; h < hs.count(); ++h) {
      PrivateHistory ph = hs.history(h);
      int k = static_cast<int>(ph.entries.size());
      // perfect monitoring: the private signal is the joint profile id
      std::vector<std::size_t> w(static_cast<std::size_t>(k));
      std::vector<bool> valid(static_cast<std::size_t>(k));
      for (int t = 0; t < k; ++t) {
        w[static_cast<std::size_t>(t)] = static_cast<std::size_t>(ph.entries[static_cast<std::size_t>(t)].second);
        valid[static_cast<std::size_t>(t)] =
            game.profiles.digit(w[static_cast<std::size_t>(t)], i) ==
            ph.entries[static_cast<std::size_t>(t)].first;
      }
      int action = -1;
      // on-script windows continue the cycle
      if (k < li) {
        bool pre = true;  // short windows occur only in the opening periods
        for (int t = 0; t < k && pre; ++t)
          pre = valid[static_cast<std::size_t>(t)] && w[static_cast<std::size_t>(t)] == cyc[static_cast<std::size_t>(t % lng)];
        if (pre)
          action = game.profiles.digit(cyc[static_cast<std::size_t>(k % lng)], i);
      } else {
        for (int t = 0; t < lng && action < 0; ++t) {
          bool match = true;
          for (int s = 0; s < k && match; ++s)
            match = valid[static_cast<std::size_t>(s)] &&
                    w[static_cast<std::size_t>(s)] ==
                        cyc[static_cast<std::size_t>((t - k + 1 + s + k * lng) % lng)];
          if (match) action = game.profiles.digit(cyc[static_cast<std::size_t>((t + 1) % lng)], i);
        }
      }
      // resumed windows: [punishment x length, restarted-cycle prefix]
      if (action < 0 && resume) {
        for (int r = k - 1; r >= 0 && action < 0; --r) {
          bool match = true;
          for (int s = 0; s < r && match; ++s)
            match = valid[static_cast<std::size_t>(k - r + s)] &&
                    w[static_cast<std::size_t>(k - r + s)] == cyc[static_cast<std::size_t>(s % lng)];
          int q = std::min(punishment_length, k - r);
          for (int s = 0; s < q && match; ++s)
            match = valid[static_cast<std::size_t>(k - r - q + s)] &&
                    w[static_cast<std::size_t>(k - r - q + s)] == p_index;
          if (match) action = game.profiles.digit(cyc[static_cast<std::size_t>(r % lng)], i);
        }
      }
      if (action < 0) action = out.punishment[static_cast<std::size_t>(i)];
      tab[static_cast<std::size_t>(h)] = static_cast<std::uint8_t>(action);
    }
    out.pure_index.push_back(engine.strategies(i).index_of(tab));
    out.profile.push_back(MixedStrategy::vertex(i, engine.strategies(i).count(),
                                                out.pure_index.back()));
  }

  MetaGame meta = build_meta_game(engine, Parallel::omp);
  out.report = check_strict(engine, meta, out.profile);
  return out;
}

BasinResult basin_experiment(const ValueEngine& engine, const MetaGame& meta,
                             const StrategyProfile& target, double radius, long seeds,
                             const EpsilonGreedyConfig& cfg, bool stochastic,
                             std::uint64_t seed, double threshold, Parallel par,
                             const std::string& target_id) {
  if (!(radius > 0.0)) throw std::invalid_argument("basin_experiment: radius must be > 0");
  if (seeds < 1) throw std::invalid_argument("basin_experiment: seeds must be >= 1");
  if (!(threshold > 0.0)) throw std::invalid_argument("basin_experiment: threshold must be > 0");
  cfg.validate(engine.players());
  engine.validate_profile(target);
  engine.prime_pure_cache(par);

  BasinResult res;
  res.target_id = target_id;
  res.radius = radius;
  res.threshold = threshold;
  res.stochastic = stochastic;
  res.seeds = seeds;
  res.target_strict = check_strict(engine, meta, target).is_strict;
  EpsilonGreedyConfig run_cfg = cfg;
  // endpoints only; intermediate profiles of every seed would swamp memory
  run_cfg.dyn.record_every = std::max<long>(run_cfg.dyn.max_episodes, 1);
  if (run_cfg.dyn.stop_tolerance <= 0.0) run_cfg.dyn.stop_tolerance = threshold;
  run_cfg.dyn.check_every = std::max<long>(run_cfg.dyn.check_every, 25);
  res.cfg = run_cfg;
  res.final_distance.assign(static_cast<std::size_t>(seeds), 0.0);
  res.episodes_used.assign(static_cast<std::size_t>(seeds), 0);

#pragma omp parallel for schedule(dynamic) if (par == Parallel::omp)
  for (long k = 0; k < seeds; ++k) {
    Rng start_rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(k)));
    StrategyProfile x0 = sample_ball_profile(target, radius, start_rng);
    Trajectory traj =
        stochastic
            ? run_stochastic(engine, std::move(x0), run_cfg,
                             derive_seed(seed, 2 * static_cast<std::uint64_t>(k) + 1), &target,
                             nullptr)
            : run_exact(engine, meta, std::move(x0), run_cfg.dyn, &target);
    res.final_distance[static_cast<std::size_t>(k)] = traj.steps.back().dist_to_target;
    res.episodes_used[static_cast<std::size_t>(k)] = traj.steps_taken;
  }
  double sum = 0.0;
  for (long k = 0; k < seeds; ++k) {
    double d = res.final_distance[static_cast<std::size_t>(k)];
    sum += d;
    if (d < threshold) ++res.converged;
  }
  res.mean_final_distance = sum / static_cast<double>(seeds);
  return res;
}

}  // namespace qrd

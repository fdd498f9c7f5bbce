#include "qrd/equivalence.hpp"

namespace qrd {

ClassAnalysis analyze_class(const ValueEngine& engine, const StrategyProfile& pi) {
  engine.validate_profile(pi);
  const int n = engine.players();
  ClassAnalysis out;
  out.reachable.resize(n);
  out.mass.resize(n);
  out.cond.resize(n);
  std::vector<int> acts(n), hists(n);
  for (int i = 0; i < n; ++i) {
    acts[i] = engine.spec().game.action_counts[i];
    hists[i] = engine.histories(i).count();
    out.mass[i].assign(hists[i], 0.0);
    out.cond[i].assign(static_cast<std::size_t>(hists[i]) * acts[i], 0.0);
  }

  std::vector<std::vector<std::size_t>> supp(n);
  std::vector<std::size_t> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) stride[i] = stride[i + 1] * engine.strategies(i + 1).count();
  for (int i = 0; i < n; ++i) {
    supp[i] = pi[i].support();
    if (supp[i].empty()) throw std::invalid_argument("analyze_class: empty support");
  }
  std::vector<std::size_t> k(n, 0);
  while (true) {
    double w = 1.0;
    std::size_t joint = 0;
    for (int i = 0; i < n; ++i) {
      w *= pi[i].w[supp[i][k[i]]];
      joint += supp[i][k[i]] * stride[i];
    }
    const PureData& pd = engine.pure_data(joint);
    for (int i = 0; i < n; ++i) {
      const auto& strat = engine.strategies(i);
      std::size_t e = supp[i][k[i]];
      for (int h = 0; h < hists[i]; ++h) {
        double m = w * pd.visits[i][h];
        if (m == 0.0) continue;
        out.mass[i][h] += m;
        out.cond[i][static_cast<std::size_t>(h) * acts[i] + strat.action_at(e, h)] += m;
      }
    }
    int d = n - 1;
    while (d >= 0 && ++k[d] == supp[d].size()) k[d--] = 0;
    if (d < 0) break;
  }
  for (int i = 0; i < n; ++i) {
    out.reachable[i].assign(hists[i], 0);
    for (int h = 0; h < hists[i]; ++h) {
      if (out.mass[i][h] > 0.0) {
        out.reachable[i][h] = 1;
        for (int a = 0; a < acts[i]; ++a)
          out.cond[i][static_cast<std::size_t>(h) * acts[i] + a] /= out.mass[i][h];
      }
    }
  }
  return out;
}

std::vector<std::vector<int>> reachable_histories(const ValueEngine& engine,
                                                  const StrategyProfile& pi) {
  ClassAnalysis ca = analyze_class(engine, pi);
  std::vector<std::vector<int>> out(engine.players());
  for (int i = 0; i < engine.players(); ++i)
    for (int h = 0; h < engine.histories(i).count(); ++h)
      if (ca.reachable[i][h]) out[i].push_back(h);
  return out;
}

namespace {

double conditional_tv(const ClassAnalysis& x, const ClassAnalysis& y, int i, int h, int acts) {
  double s = 0.0;
  for (int a = 0; a < acts; ++a)
    s += std::fabs(x.cond[i][static_cast<std::size_t>(h) * acts + a] -
                   y.cond[i][static_cast<std::size_t>(h) * acts + a]);
  return 0.5 * s;
}

}  // namespace

bool same_class(const ValueEngine& engine, const ClassAnalysis& a, const ClassAnalysis& b,
                double tol) {
  for (int i = 0; i < engine.players(); ++i) {
    int acts = engine.spec().game.action_counts[i];
    for (int h = 0; h < engine.histories(i).count(); ++h) {
      if (a.reachable[i][h] != b.reachable[i][h]) return false;
      if (a.reachable[i][h] && conditional_tv(a, b, i, h, acts) > tol) return false;
    }
  }
  return true;
}

double class_distance(const ValueEngine& engine, const ClassAnalysis& pi,
                      const ClassAnalysis& target) {
  double worst_tv = 0.0;
  double mismatches = 0.0;
  for (int i = 0; i < engine.players(); ++i) {
    int acts = engine.spec().game.action_counts[i];
    for (int h = 0; h < engine.histories(i).count(); ++h) {
      if (pi.reachable[i][h] != target.reachable[i][h]) {
        mismatches += 1.0;
      } else if (target.reachable[i][h]) {
        worst_tv = std::max(worst_tv, conditional_tv(pi, target, i, h, acts));
      }
    }
  }
  return worst_tv + mismatches;
}

bool same_class(const ValueEngine& engine, const StrategyProfile& a, const StrategyProfile& b,
                double tol) {
  return same_class(engine, analyze_class(engine, a), analyze_class(engine, b), tol);
}

double distance_to_class(const ValueEngine& engine, const StrategyProfile& pi,
                         const StrategyProfile& target) {
  return class_distance(engine, analyze_class(engine, pi), analyze_class(engine, target));
}

}  // namespace qrd

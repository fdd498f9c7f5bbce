// Serial vs OpenMP timing for the four parallel kernels. Each kernel has an
// index-addressed work decomposition, so the two modes must agree bitwise;
// the harness asserts that before reporting the speedup.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qrd/equilibrium.hpp"
#include "qrd/estimator.hpp"
#include "qrd/folk.hpp"
#include "qrd/scenarios.hpp"

using namespace qrd;

namespace {

template <typename F>
double time_s(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double omp, bool identical) {
  if (!identical) throw std::runtime_error(std::string(name) + ": modes disagree");
  std::printf("%-22s serial %8.3fs   omp %8.3fs   speedup %5.2fx   identical yes\n", name,
              serial, omp, serial / omp);
}

}  // namespace

int main() {
  double delta = 0.9;
  std::vector<int> recall{1};
  Scenario sc = load_scenario("pd_standard", &delta, &recall);

  // 1. meta-game fill: one linear solve per joint pure profile. The engine
  // memoizes pure values, so each mode gets a fresh engine (cold cache).
  ValueEngine es(sc.spec), engine(sc.spec);
  std::printf("kernel benchmark: pd delta=0.9 recall=1 (%zu x %zu strategies)\n",
              engine.strategies(0).count(), engine.strategies(1).count());
  MetaGame ms, mo;
  double t_ms = time_s([&] { ms = build_meta_game(es, Parallel::serial); });
  double t_mo = time_s([&] { mo = build_meta_game(engine, Parallel::omp); });
  row("meta-game fill", t_ms, t_mo, ms.payoff == mo.payoff);

  // 2. basin seeds: independent exact trajectories from a ball around grim
  // (pure cache already primed by the fill above, symmetric for both modes)
  const StrategyProfile* grim = find_reference(sc, "grim");
  EpsilonGreedyConfig bc;
  bc.dyn.q = 0.0;
  bc.dyn.gamma = {0.01};
  bc.dyn.p = 1.0;
  bc.dyn.m = 10.0;
  bc.dyn.max_episodes = 2000;
  // wide ball: most starts are outside the basin, so seeds use the full
  // episode budget instead of early-stopping at the class threshold
  BasinResult bs, bo;
  double t_bs = time_s([&] {
    bs = basin_experiment(engine, ms, *grim, 0.5, 96, bc, false, 1, 0.05, Parallel::serial,
                          "grim");
  });
  double t_bo = time_s([&] {
    bo = basin_experiment(engine, ms, *grim, 0.5, 96, bc, false, 1, 0.05, Parallel::omp,
                          "grim");
  });
  row("basin seeds", t_bs, t_bo,
      bs.final_distance == bo.final_distance && bs.episodes_used == bo.episodes_used);

  // 3. lemma trials: random specs, both certification routes per profile
  const SpecGenerator gen = [](Rng& r) { return random_small_spec(r); };
  LemmaCrossValidation ls, lo;
  double t_ls =
      time_s([&] { ls = cross_validate_lemma(gen, 40, 300, 0.05, 7, Parallel::serial); });
  double t_lo = time_s([&] { lo = cross_validate_lemma(gen, 40, 300, 0.05, 7, Parallel::omp); });
  row("lemma trials", t_ls, t_lo,
      ls.profiles_checked == lo.profiles_checked && ls.strict_found == lo.strict_found &&
          ls.confirmed_disagreements == lo.confirmed_disagreements);

  // 4. noise-diagnostic batches: REINFORCE samples along a short trajectory
  QReplicatorConfig dc;
  dc.gamma = {0.01};
  dc.max_episodes = 40;
  Rng rng(11);
  StrategyProfile start;
  for (int i = 0; i < engine.players(); ++i) {
    std::size_t n = engine.strategies(i).count();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    start.push_back(MixedStrategy{i, std::move(w)});
  }
  Trajectory tr = run_exact(engine, ms, start, dc);
  EpsilonGreedyConfig nc;
  nc.dyn = dc;
  NoiseDiagnostics ns, no;
  double t_ns =
      time_s([&] { ns = diagnose_noise(engine, ms, tr.profiles, 64, nc, 3, Parallel::serial); });
  double t_no =
      time_s([&] { no = diagnose_noise(engine, ms, tr.profiles, 64, nc, 3, Parallel::omp); });
  row("diagnostic batches", t_ns, t_no,
      ns.second_moment == no.second_moment && ns.bias_matched == no.bias_matched &&
          ns.bias_true == no.bias_true);

  return 0;
}

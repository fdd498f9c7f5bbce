#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "qrd/behavioural.hpp"
#include "qrd/scenarios.hpp"
#include "qrd/valuation.hpp"

using namespace qrd;

namespace {

Scenario pd(double delta, int recall) {
  std::vector<int> r{recall};
  return load_scenario("pd_standard", &delta, &r);
}

// cooperate on-script (empty window or last profile (C,C)), defect otherwise
BehaviouralProfile grim_behavioural(const BehaviouralEngine& engine) {
  std::vector<std::vector<int>> tables(2, std::vector<int>(engine.history_count(), 1));
  const WindowSpace& ws = engine.windows();
  for (int h = 0; h < ws.count(); ++h) {
    auto e = ws.entries(h);
    bool on_script = true;
    for (int z : e) on_script = on_script && z == 0;
    if (on_script)
      for (auto& t : tables) t[static_cast<std::size_t>(h)] = 0;
  }
  return engine.pure(tables);
}

}  // namespace

TEST_CASE("behavioural engine accepts exactly the public-recall games") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  CHECK(engine.history_count() == 5);  // empty + the four joint profiles
  CHECK(engine.players() == 2);

  Scenario noisy = load_scenario("pd_variant_noisy", nullptr, nullptr);
  CHECK_THROWS_AS(BehaviouralEngine{noisy.spec}, std::invalid_argument);

  RepeatedGameSpec uneven = sc.spec;
  uneven.recall = {1, 2};
  CHECK_THROWS_AS(BehaviouralEngine{uneven}, std::invalid_argument);

  BehaviouralProfile u = engine.uniform();
  engine.validate(u);
  u.cond[0][2] = {0.7, 0.7};
  CHECK_THROWS_AS(engine.validate(u), std::invalid_argument);
  u.cond[0][2] = {0.7};
  CHECK_THROWS_AS(engine.validate(u), std::invalid_argument);
}

TEST_CASE("grim continuation values split into the on- and off-script levels") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  BehaviouralProfile grim = grim_behavioural(engine);
  ContinuationValueTable tab = continuation_values(engine, grim);
  const WindowSpace& ws = engine.windows();
  for (int i = 0; i < 2; ++i) {
    CHECK(tab.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(ws.id_of({}))] ==
          doctest::Approx(20.0).epsilon(1e-10));
    CHECK(tab.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(ws.id_of({0}))] ==
          doctest::Approx(20.0).epsilon(1e-10));
    for (int z : {1, 2, 3})
      CHECK(tab.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(ws.id_of({z}))] ==
            doctest::Approx(10.0).epsilon(1e-10));
  }

  // all-defect: 1 + delta + delta^2 + ... everywhere
  std::vector<std::vector<int>> all_d(2, std::vector<int>(engine.history_count(), 1));
  ContinuationValueTable td = continuation_values(engine, engine.pure(all_d));
  for (int i = 0; i < 2; ++i)
    for (int h = 0; h < engine.history_count(); ++h)
      CHECK(td.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] ==
            doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("continuation values satisfy the one-step consistency identity") {
  Scenario sc = pd(0.85, 1);
  BehaviouralEngine engine(sc.spec);
  const StageGame& game = sc.spec.game;
  const WindowSpace& ws = engine.windows();

  Rng rng(4242);
  BehaviouralProfile pi = engine.uniform();
  for (auto& player : pi.cond)
    for (auto& row : player) row = rng.simplex(2);

  ContinuationValueTable tab = continuation_values(engine, pi);
  for (int i = 0; i < 2; ++i)
    for (int h = 0; h < ws.count(); ++h) {
      double rhs = 0.0;
      for (std::size_t a = 0; a < game.num_profiles(); ++a) {
        double prob = 1.0;
        for (int j = 0; j < 2; ++j)
          prob *= pi.cond[static_cast<std::size_t>(j)][static_cast<std::size_t>(h)]
                         [static_cast<std::size_t>(game.profiles.digit(a, j))];
        int next = ws.append(h, static_cast<int>(a));
        rhs += prob * (game.payoffs[static_cast<std::size_t>(i)][a] +
                       sc.spec.delta *
                           tab.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(next)]);
      }
      CHECK(std::fabs(tab.v[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] - rhs) <=
            1e-10);
    }
}

TEST_CASE("one-shot-deviation test certifies grim exactly when patience pays") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  BehaviouralProfile grim = grim_behavioural(engine);
  SpneReport rep = check_strict_spne(engine, grim);
  CHECK(rep.is_strict);
  // tightest deviation: cooperating once inside the punishment phase,
  // 0 + 0.9 * 10 = 9 against 10
  CHECK(rep.worst_margin == doctest::Approx(1.0).epsilon(1e-9));

  Scenario sc3 = pd(0.3, 1);
  BehaviouralEngine engine3(sc3.spec);
  BehaviouralProfile grim3 = grim_behavioural(engine3);
  SpneReport bad = check_strict_spne(engine3, grim3);
  CHECK_FALSE(bad.is_strict);
  // defecting on-script: 3 + 0.3 * (1/0.7) against 2/0.7
  CHECK(bad.worst_margin == doctest::Approx(-4.0 / 7.0).epsilon(1e-9));
  CHECK(bad.worst_action == 1);

  CHECK_THROWS_AS(check_strict_spne(engine, engine.uniform()), std::invalid_argument);
}

TEST_CASE("q=1 behavioural gradient vanishes at a pure SPNE") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  BehaviouralProfile grim = grim_behavioural(engine);
  auto g = behavioural_q_gradient(engine, grim, 1.0);
  for (const auto& player : g)
    for (const auto& row : player)
      for (double v : row) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("recall-zero behavioural gradient reduces to the one-shot gradient") {
  std::vector<int> r0{0};
  double d0 = 0.0;
  Scenario sc = load_scenario("pd_standard", &d0, &r0);
  BehaviouralEngine bengine(sc.spec);
  ValueEngine engine(sc.spec);
  MetaGame meta = build_meta_game(engine, Parallel::serial);

  Rng rng(99);
  for (double q : {0.0, 0.5, 1.0, 2.0})
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> s0 = rng.simplex(2);
      std::vector<double> s1 = rng.simplex(2);
      BehaviouralProfile pi;
      pi.cond = {{s0}, {s1}};
      StrategyProfile mp{MixedStrategy{0, s0}, MixedStrategy{1, s1}};
      auto gb = behavioural_q_gradient(bengine, pi, q);
      auto gm = q_gradient(meta, mp, q);
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < 2; ++a)
          CHECK(std::fabs(gb[static_cast<std::size_t>(i)][0][static_cast<std::size_t>(a)] -
                          gm[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)]) <= 1e-10);
    }

  // hand values at the uniform point: deviation rows (1,2) per player
  BehaviouralProfile u = bengine.uniform();
  auto g0 = behavioural_q_gradient(bengine, u, 0.0);
  auto g1 = behavioural_q_gradient(bengine, u, 1.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(g0[static_cast<std::size_t>(i)][0][0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(g0[static_cast<std::size_t>(i)][0][1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g1[static_cast<std::size_t>(i)][0][0] == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(g1[static_cast<std::size_t>(i)][0][1] == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("behavioural ball samples stay inside the radius on every row") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  BehaviouralProfile center = engine.uniform();
  Rng rng(7);
  for (int k = 0; k < 25; ++k) {
    BehaviouralProfile s = sample_behavioural_ball(center, 0.1, rng);
    engine.validate(s);
    CHECK(behavioural_distance(center, s) <= 0.1 + 1e-12);
  }
  CHECK(behavioural_distance(center, center) == 0.0);
}

TEST_CASE("projected behavioural dynamics recovers grim from its neighborhood") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  BehaviouralProfile grim = grim_behavioural(engine);

  QReplicatorConfig cfg;
  cfg.q = 0.0;
  cfg.gamma = {0.01};
  cfg.p = 1.0;
  cfg.m = 10.0;
  cfg.max_episodes = 4000;
  cfg.record_every = 1000;
  cfg.stop_tolerance = 0.01;

  Rng rng(20260819);
  for (int start = 0; start < 3; ++start) {
    BehaviouralProfile pi0 = sample_behavioural_ball(grim, 0.02, rng);
    BehaviouralTrajectory tr = run_behavioural(engine, pi0, cfg, &grim);
    REQUIRE(!tr.profiles.empty());
    CHECK(behavioural_distance(tr.profiles.back(), grim) < 0.05);
    CHECK(tr.steps.back().values[0] == doctest::Approx(20.0).epsilon(0.05));
    CHECK(tr.steps_taken <= 4000);
    CHECK(tr.profiles.size() == tr.steps.size());
  }
}

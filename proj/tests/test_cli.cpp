#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"
#include "qrd/cli.hpp"
#include "qrd/io.hpp"
#include "qrd/scenarios.hpp"

#ifndef QRD_CLI_PATH
#define QRD_CLI_PATH ""
#endif

namespace fs = std::filesystem;
using namespace qrd;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "qrd_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("qrd");
  for (const auto& s : args) argv.push_back(s.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

Scenario pd(double delta, int recall) {
  std::vector<int> r{recall};
  return load_scenario("pd_standard", &delta, &r);
}

}  // namespace

TEST_CASE("game files round-trip through JSON") {
  fs::path dir = fresh_dir("game_roundtrip");
  Scenario noisy = load_scenario("pd_variant_noisy(0.01,0.02,0.03)", nullptr, nullptr);
  io::save_game(noisy.spec, (dir / "noisy.json").string());
  RepeatedGameSpec back = io::load_game((dir / "noisy.json").string());
  CHECK(back.delta == noisy.spec.delta);
  CHECK(back.recall == noisy.spec.recall);
  CHECK(back.game.payoffs == noisy.spec.game.payoffs);
  CHECK(back.monitoring.signal_counts == noisy.spec.monitoring.signal_counts);
  CHECK(back.monitoring.kernel == noisy.spec.monitoring.kernel);  // exact doubles
  CHECK_FALSE(back.monitoring.is_perfect);

  Scenario p = pd(0.6, 1);
  json j = io::game_to_json(p.spec);
  CHECK(j.at("monitoring") == "perfect");
  io::save_game(p.spec, (dir / "pd.json").string());
  RepeatedGameSpec pback = io::load_game((dir / "pd.json").string());
  CHECK(pback.monitoring.is_perfect);
  CHECK(pback.game.action_names == p.spec.game.action_names);
  CHECK(pback.strategy_cap == p.spec.strategy_cap);
}

TEST_CASE("profile files load in all three forms") {
  Scenario sc = pd(0.9, 1);
  ValueEngine engine(sc.spec);
  fs::path dir = fresh_dir("profile_forms");
  const StrategyProfile* grim = find_reference(sc, "grim");
  REQUIRE(grim != nullptr);

  io::save_profile(engine, *grim, (dir / "w.json").string());
  StrategyProfile w = io::load_profile(engine, (dir / "w.json").string());
  for (int i = 0; i < 2; ++i) CHECK(w[i].w == (*grim)[i].w);

  json jp;
  jp["strategies"] = json::array();
  for (int i = 0; i < 2; ++i) jp["strategies"].push_back({{"pure_index", 3}});
  io::write_text((dir / "p.json").string(), jp.dump());
  StrategyProfile p = io::load_profile(engine, (dir / "p.json").string());
  for (int i = 0; i < 2; ++i) {
    CHECK(p[i].w[3] == 1.0);
    CHECK(p[i].support().size() == 1);
  }

  // grim as a sparse table with a default action
  json jt;
  jt["strategies"] = json::array();
  for (int i = 0; i < 2; ++i)
    jt["strategies"].push_back({{"table", {{"", "C"}, {"C:CC", "C"}, {"default", "D"}}}});
  io::write_text((dir / "t.json").string(), jt.dump());
  StrategyProfile t = io::load_profile(engine, (dir / "t.json").string());
  for (int i = 0; i < 2; ++i) CHECK(t[i].w == (*grim)[i].w);

  // a table with no default must cover every window
  json jm;
  jm["strategies"] = json::array();
  for (int i = 0; i < 2; ++i) jm["strategies"].push_back({{"table", {{"", "C"}}}});
  io::write_text((dir / "m.json").string(), jm.dump());
  CHECK_THROWS_AS(io::load_profile(engine, (dir / "m.json").string()), std::invalid_argument);
}

TEST_CASE("weight ingest accepts rounding noise and rejects real drift") {
  Scenario sc = pd(0.9, 1);
  ValueEngine engine(sc.spec);
  const std::size_t n = engine.strategies(0).count();
  REQUIRE(n == 32);

  auto load_weights = [&](const std::vector<double>& w0, const std::vector<double>& w1) {
    json j;
    j["strategies"] = json::array();
    j["strategies"].push_back({{"weights", w0}});
    j["strategies"].push_back({{"weights", w1}});
    return io::profile_from_json(engine, j);
  };

  std::vector<double> uni(n, 1.0 / static_cast<double>(n));
  std::vector<double> drift(n, (1.0 + 2e-10) / static_cast<double>(n));
  StrategyProfile ok = load_weights(drift, uni);
  double sum = 0.0;
  for (double v : ok[0].w) sum += v;
  CHECK(std::fabs(sum - 1.0) <= 1e-12);  // renormalized on the way in

  std::vector<double> bad(n, (1.0 + 1e-8) / static_cast<double>(n));
  CHECK_THROWS_AS(load_weights(bad, uni), std::invalid_argument);

  std::vector<double> clamp = uni;
  clamp[0] = -1e-13;  // tiny negative: clamped to zero
  clamp[1] += 1.0 / static_cast<double>(n);
  StrategyProfile c = load_weights(clamp, uni);
  CHECK(c[0].w[0] == 0.0);

  std::vector<double> neg = uni;
  neg[0] = -1e-10;  // beyond the clamp band: rejected
  neg[1] += 1.0 / static_cast<double>(n);
  CHECK_THROWS_AS(load_weights(neg, uni), std::invalid_argument);
}

TEST_CASE("window labels round-trip and reject the unreachable") {
  Scenario sc = pd(0.9, 1);
  ValueEngine engine(sc.spec);
  CHECK(io::history_label(engine, 0, 0) == "");
  CHECK(io::history_id_from_label(engine, 0, "") == 0);
  for (int h = 0; h < engine.histories(0).count(); ++h) {
    const std::string label = io::history_label(engine, 0, h);
    CHECK(io::history_id_from_label(engine, 0, label) == h);
  }
  const int hcc = io::history_id_from_label(engine, 0, "C:CC");
  CHECK(engine.histories(0).history(hcc).entries ==
        std::vector<std::pair<int, int>>{{0, 0}});
  CHECK_THROWS_AS(io::history_id_from_label(engine, 0, "C:XX"), std::invalid_argument);
  CHECK_THROWS_AS(io::history_id_from_label(engine, 0, "C"), std::invalid_argument);
  // perfect monitoring: the signal announces the profile, so C:DD cannot occur
  CHECK_THROWS_AS(io::history_id_from_label(engine, 0, "C:DD"), std::invalid_argument);
}

TEST_CASE("behavioural files round-trip with label rows and defaults") {
  Scenario sc = pd(0.9, 1);
  BehaviouralEngine engine(sc.spec);
  fs::path dir = fresh_dir("behavioural_files");

  CHECK(io::public_window_label(engine, 0) == "");
  json j;
  j["behavioural"] = json::array();
  for (int i = 0; i < 2; ++i)
    j["behavioural"].push_back(
        {{"rows", {{"", {1.0, 0.0}}, {"CC", {1.0, 0.0}}, {"default", {0.0, 1.0}}}}});
  io::write_text((dir / "b.json").string(), j.dump());
  BehaviouralProfile grim = io::load_behavioural(engine, (dir / "b.json").string());
  engine.validate(grim);
  json round = io::behavioural_to_json(engine, grim);
  BehaviouralProfile back = io::behavioural_from_json(engine, round);
  CHECK(back.cond == grim.cond);

  json missing;
  missing["behavioural"] = json::array();
  for (int i = 0; i < 2; ++i) missing["behavioural"].push_back({{"rows", {{"", {1.0, 0.0}}}}});
  CHECK_THROWS_AS(io::behavioural_from_json(engine, missing), std::invalid_argument);
}

TEST_CASE("simulate drives the one-shot dilemma to all-defect") {
  fs::path dir = fresh_dir("simulate_exact");
  int rc = run_cli({"simulate", "--scenario", "pd_standard", "--exact", "--episodes", "10000",
                    "--out", dir.string(), "--seed", "1"});
  CHECK(rc == 0);
  for (const char* name : {"trajectory.csv", "summary.csv", "final_profile.json",
                           "manifest.json"})
    CHECK(fs::exists(dir / name));

  json fin = json::parse(io::read_text((dir / "final_profile.json").string()));
  for (const auto& e : fin.at("strategies")) {
    std::vector<double> w = e.at("weights").get<std::vector<double>>();
    REQUIRE(w.size() == 2);
    CHECK(w[1] >= 1.0 - 1e-3);  // within 1e-3 total variation of the vertex
  }

  std::string summary = io::read_text((dir / "summary.csv").string());
  CHECK(summary.rfind("n,gradient_norm,distance_to_target", 0) == 0);
  std::string traj = io::read_text((dir / "trajectory.csv").string());
  CHECK(traj.rfind("n,player,component,weight", 0) == 0);

  json man = json::parse(io::read_text((dir / "manifest.json").string()));
  CHECK(man.at("version") == "v0.1.0");
  CHECK(man.at("master_seed") == 1);
  CHECK(man.at("config").at("episodes") == 10000);
  CHECK(man.contains("created_utc"));
}

TEST_CASE("check-eq exit codes follow the verdict") {
  fs::path dir = fresh_dir("check_eq_strict");
  int rc = run_cli({"check-eq", "--scenario", "pd_variant_noisy(0.01,0.01,0.01)", "--out",
                    dir.string()});
  CHECK(rc == 0);
  json rep = json::parse(io::read_text((dir / "check_eq.json").string()));
  CHECK(rep.at("is_strict") == true);
  CHECK(rep.at("value")[0].get<double>() == doctest::Approx(39.2581).epsilon(1e-3));

  fs::path dir2 = fresh_dir("check_eq_loose");
  rc = run_cli({"check-eq", "--scenario", "pd_standard", "--delta", "0.3", "--recall", "1",
                "--profile", "grim", "--out", dir2.string()});
  CHECK(rc == 1);
  json rep2 = json::parse(io::read_text((dir2 / "check_eq.json").string()));
  CHECK(rep2.at("is_equilibrium") == false);
  CHECK(rep2.at("worst_gain").get<double>() == doctest::Approx(4.0 / 7.0).epsilon(1e-9));

  fs::path dir3 = fresh_dir("check_eq_var");
  rc = run_cli({"check-eq", "--scenario", "pd_standard", "--delta", "0.9", "--recall", "1",
                "--profile", "grim", "--variational", "--samples", "200", "--out",
                dir3.string()});
  CHECK(rc == 0);
  json rep3 = json::parse(io::read_text((dir3 / "check_eq.json").string()));
  CHECK(rep3.at("variational").at("c1_holds") == true);
  CHECK(rep3.at("variational").at("c2_holds") == true);
  CHECK(rep3.at("variational").at("c2_samples").get<long>() > 0);
}

TEST_CASE("validation and capacity failures use distinct exit codes") {
  fs::path dir = fresh_dir("bad_args");
  CHECK(run_cli({"basin", "--scenario", "pd_standard", "--seeds", "0", "--out",
                 dir.string()}) == 2);
  CHECK(run_cli({"simulate", "--scenario", "pd_standard", "--exact", "--recall", "3",
                 "--out", dir.string()}) == 3);
  CHECK(run_cli({"simulate", "--scenario", "no_such_scenario", "--out", dir.string()}) == 2);
  CHECK(run_cli({"simulate", "--out", dir.string()}) == 2);  // no scenario and no game
  CHECK(run_cli({"simulate", "--scenario", "pd_standard", "--game", "x.json", "--out",
                 dir.string()}) == 2);
  CHECK(run_cli({"simulate", "--scenario", "pd_standard", "--no-such-flag"}) == 2);
  CHECK(run_cli({"folk-set", "--scenario", "pd_standard", "--point", "1,2,3", "--out",
                 dir.string()}) == 2);
  CHECK(run_cli({"folk-set", "--scenario", "pd_standard", "--set", "wibble", "--out",
                 dir.string()}) == 2);
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("folk-set reports the membership verdicts") {
  fs::path dir = fresh_dir("folk_set");
  int rc = run_cli({"folk-set", "--scenario", "pd_standard", "--set", "mixed", "--point",
                    "2,2", "--point", "0.5,2.5", "--point", "3,3", "--out", dir.string()});
  CHECK(rc == 0);
  json out = json::parse(io::read_text((dir / "folk_set.json").string()));
  CHECK(out.at("hull_vertices").size() == 4);
  CHECK(out.at("minmax_mixed")[0].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(out.at("points")[0].at("in_set") == true);
  CHECK(out.at("points")[1].at("in_set") == false);
  CHECK(out.at("points")[2].at("in_set") == false);

  fs::path dir2 = fresh_dir("folk_set_strict");
  rc = run_cli({"folk-set", "--scenario", "pd_standard", "--set", "strict", "--point", "1,1",
                "--out", dir2.string()});
  CHECK(rc == 0);
  json strict = json::parse(io::read_text((dir2 / "folk_set.json").string()));
  CHECK(strict.at("points")[0].at("in_set") == false);
}

TEST_CASE("meta-game dump lists the spaces and the payoff table") {
  fs::path dir = fresh_dir("meta_game");
  int rc = run_cli({"meta-game", "--scenario", "matching_pennies", "--delta", "0",
                    "--recall", "0", "--out", dir.string()});
  CHECK(rc == 0);
  std::string text = io::read_text((dir / "meta_game.txt").string());
  CHECK(text.find("meta-game players=2") != std::string::npos);
  CHECK(text.find("player 0 windows=1 strategies=2") != std::string::npos);
  CHECK(text.find("player 1 windows=1 strategies=2") != std::string::npos);
  CHECK(text.find("values profiles=4") != std::string::npos);
  CHECK(text.find("-1") != std::string::npos);
}

TEST_CASE("config file fills unset flags and command-line flags win") {
  fs::path dir = fresh_dir("config_merge");
  json cfg;
  cfg["episodes"] = 50;
  cfg["gamma"] = 0.2;
  fs::path file = dir / "config.json";
  io::write_text(file.string(), cfg.dump());

  int rc = run_cli({"simulate", "--scenario", "pd_standard", "--exact", "--episodes", "20",
                    "--config", file.string(), "--out", (dir / "out").string()});
  CHECK(rc == 0);
  json man = json::parse(io::read_text((dir / "out" / "manifest.json").string()));
  CHECK(man.at("config").at("episodes") == 20);   // flag beats file
  CHECK(man.at("config").at("gamma") == 0.2);     // file fills the rest

  json bad = {{"wibble", 3}};
  io::write_text((dir / "bad.json").string(), bad.dump());
  CHECK(run_cli({"simulate", "--scenario", "pd_standard", "--exact", "--config",
                 (dir / "bad.json").string(), "--out", (dir / "out2").string()}) == 2);
}

TEST_CASE("stochastic runs are reproducible from the master seed") {
  fs::path a = fresh_dir("seed_a");
  fs::path b = fresh_dir("seed_b");
  std::vector<std::string> common{"simulate", "--scenario",   "pd_standard", "--episodes",
                                  "800",      "--seed",       "42",          "--log-episodes",
                                  "1",        "--record-every", "50"};
  auto with_out = [&](const fs::path& dir) {
    std::vector<std::string> v = common;
    v.push_back("--out");
    v.push_back(dir.string());
    return v;
  };
  CHECK(run_cli(with_out(a)) == 0);
  CHECK(run_cli(with_out(b)) == 0);
  for (const char* name : {"trajectory.csv", "summary.csv", "episode_0.csv"})
    CHECK(io::read_text((a / name).string()) == io::read_text((b / name).string()));

  std::string ep = io::read_text((a / "episode_0.csv").string());
  CHECK(ep.rfind("period,action_0", 0) == 0);

  fs::path c = fresh_dir("seed_c");
  std::vector<std::string> other = with_out(c);
  other[6] = "43";  // the seed value
  CHECK(run_cli(other) == 0);
  CHECK(io::read_text((a / "trajectory.csv").string()) !=
        io::read_text((c / "trajectory.csv").string()));
}

TEST_CASE("diagnose writes the annotated noise report") {
  fs::path dir = fresh_dir("diagnose");
  int rc = run_cli({"diagnose", "--scenario", "pd_standard", "--episodes", "100", "--samples",
                    "40", "--seed", "3", "--out", dir.string()});
  CHECK(rc == 0);
  std::string text = io::read_text((dir / "diagnostics.csv").string());
  CHECK(text.rfind("# estimator_variant=", 0) == 0);
  CHECK(text.find("# samples_per_step=") != std::string::npos);
  CHECK(text.find("sigma_ok=") != std::string::npos);
  CHECK(text.find("bias_ok=") != std::string::npos);
  CHECK(text.find("n,second_moment,bias_matched,bias_true") != std::string::npos);
}

TEST_CASE("binary entry point answers help and rejects junk") {
  const std::string bin = QRD_CLI_PATH;
  if (bin.empty()) return;  // compiled outside the build system
  int rc = std::system((bin + " --help > /dev/null 2>&1").c_str());
  REQUIRE(rc != -1);
  CHECK(WEXITSTATUS(rc) == 0);
  rc = std::system((bin + " frobnicate > /dev/null 2>&1").c_str());
  REQUIRE(rc != -1);
  CHECK(WEXITSTATUS(rc) == 2);
}

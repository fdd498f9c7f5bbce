#include "qrd/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "qrd/equilibrium.hpp"
#include "qrd/io.hpp"
#include "qrd/scenarios.hpp"

namespace qrd::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// one merge entry: a CLI option plus how to load the same key from a config
// file (applied only when the flag was not given on the command line)
struct Bind {
  CLI::App* sub;
  std::string key;
  CLI::Option* opt;
  std::function<void(const json&)> load;
};

template <typename T>
CLI::Option* bind_opt(std::vector<Bind>& binds, CLI::App* sub, const std::string& flag,
                      const std::string& key, T& ref, const std::string& desc) {
  CLI::Option* o = sub->add_option(flag, ref, desc);
  binds.push_back({sub, key, o, [&ref](const json& v) { ref = v.get<T>(); }});
  return o;
}

CLI::Option* bind_flag(std::vector<Bind>& binds, CLI::App* sub, const std::string& flag,
                       const std::string& key, bool& ref, const std::string& desc) {
  CLI::Option* o = sub->add_flag(flag, ref, desc);
  binds.push_back({sub, key, o, [&ref](const json& v) { ref = v.get<bool>(); }});
  return o;
}

ScoreVariant variant_of(const std::string& s) {
  if (s == "pure_score") return ScoreVariant::pure_score;
  if (s == "paper_literal") return ScoreVariant::paper_literal;
  throw std::invalid_argument("estimator must be pure_score or paper_literal, got '" + s + "'");
}

IrVariant ir_variant_of(const std::string& s) {
  if (s == "mixed") return IrVariant::mixed;
  if (s == "strict") return IrVariant::strict_mixed;
  if (s == "pure") return IrVariant::pure;
  throw std::invalid_argument("set must be mixed, strict, or pure, got '" + s + "'");
}

// scenario text or game file; flag overrides are applied before reference
// profiles are built so vertex indices match the final enumeration
Scenario resolve_scenario(const ExperimentConfig& cfg) {
  if (cfg.scenario.empty() == cfg.game_path.empty())
    throw std::invalid_argument("exactly one of --scenario / --game is required");
  const double* d = cfg.delta_set ? &cfg.delta : nullptr;
  const std::vector<int>* r = cfg.recall.empty() ? nullptr : &cfg.recall;
  if (!cfg.scenario.empty()) return load_scenario(cfg.scenario, d, r);
  Scenario sc;
  sc.name = cfg.game_path;
  sc.spec = io::load_game(cfg.game_path);
  if (d) sc.spec.delta = *d;
  if (r) {
    if (r->size() == 1)
      sc.spec.recall.assign(sc.spec.game.players, r->front());
    else
      sc.spec.recall = *r;
  }
  sc.spec.validate();
  return sc;
}

// name of a scenario reference profile, or a JSON profile file path;
// empty picks the first available fallback ("" in the list means uniform)
StrategyProfile resolve_profile(const ValueEngine& engine, const Scenario& sc,
                                const std::string& which,
                                const std::vector<std::string>& fallbacks) {
  if (which.empty()) {
    for (const std::string& f : fallbacks) {
      if (f.empty()) {
        StrategyProfile pi;
        for (int i = 0; i < engine.players(); ++i)
          pi.push_back(MixedStrategy::uniform(i, engine.strategies(i).count()));
        return pi;
      }
      if (const StrategyProfile* ref = find_reference(sc, f)) return *ref;
    }
    throw std::invalid_argument("no profile given and the scenario has no applicable reference");
  }
  if (const StrategyProfile* ref = find_reference(sc, which)) return *ref;
  if (fs::exists(which)) return io::load_profile(engine, which);
  std::string known;
  for (const auto& [n, _] : sc.references) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("profile '" + which + "' is neither a file nor a reference (have: " +
                              (known.empty() ? "none" : known) + ")");
}

QReplicatorConfig dynamics_config(const ExperimentConfig& cfg) {
  QReplicatorConfig dyn;
  dyn.q = cfg.q;
  dyn.gamma = {cfg.gamma};
  dyn.p = cfg.p;
  dyn.m = cfg.m;
  dyn.max_episodes = cfg.episodes;
  dyn.record_every = cfg.record_every > 0 ? cfg.record_every : std::max(1L, cfg.episodes / 100);
  dyn.check_every = 1;
  return dyn;
}

json config_snapshot(const ExperimentConfig& cfg, const Scenario& sc) {
  json j;
  j["mode"] = cfg.mode;
  j["scenario"] = sc.name;
  j["out"] = cfg.out;
  j["delta"] = sc.spec.delta;
  j["recall"] = sc.spec.recall;
  j["q"] = cfg.q;
  j["gamma"] = cfg.gamma;
  j["p"] = cfg.p;
  j["m"] = cfg.m;
  j["epsilon"] = cfg.epsilon;
  j["estimator"] = cfg.estimator;
  j["exact"] = cfg.exact;
  j["episodes"] = cfg.episodes;
  j["record_every"] = cfg.record_every;
  j["seeds"] = cfg.seeds;
  j["radius"] = cfg.radius;
  j["threshold"] = cfg.threshold;
  if (!cfg.profile.empty()) j["profile"] = cfg.profile;
  if (!cfg.target.empty()) j["target"] = cfg.target;
  if (!cfg.points.empty()) j["points"] = cfg.points;
  if (cfg.mode == "folk-set") j["set"] = cfg.set_variant;
  return j;
}

void emit(const fs::path& dir, const std::string& name, const std::string& body) {
  io::write_text((dir / name).string(), body);
  std::printf("  wrote %s\n", (dir / name).string().c_str());
}

void emit_manifest(const fs::path& dir, const ExperimentConfig& cfg, const Scenario& sc,
                   const json& schedule) {
  emit(dir, "manifest.json",
       io::make_manifest(config_snapshot(cfg, sc), cfg.seed, schedule).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

int run_simulate(const ExperimentConfig& cfg) {
  Scenario sc = resolve_scenario(cfg);
  ValueEngine engine(sc.spec);
  MetaGame meta = build_meta_game(engine, Parallel::omp);
  StrategyProfile start = resolve_profile(engine, sc, cfg.profile, {""});
  StrategyProfile target;
  const StrategyProfile* target_ptr = nullptr;
  if (!cfg.target.empty()) {
    target = resolve_profile(engine, sc, cfg.target, {});
    target_ptr = &target;
  }

  Trajectory traj;
  if (cfg.exact) {
    traj = run_exact(engine, meta, start, dynamics_config(cfg), target_ptr);
  } else {
    EpsilonGreedyConfig ecfg;
    ecfg.dyn = dynamics_config(cfg);
    ecfg.epsilon = cfg.epsilon;
    ecfg.variant = variant_of(cfg.estimator);
    traj = run_stochastic(engine, start, ecfg, derive_seed(cfg.seed, 0), target_ptr, &meta);
  }

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ostringstream tcsv, scsv;
  io::write_trajectory_csv(tcsv, traj);
  io::write_summary_csv(scsv, traj);
  emit(dir, "trajectory.csv", tcsv.str());
  emit(dir, "summary.csv", scsv.str());
  emit(dir, "final_profile.json",
       io::profile_to_json(engine, traj.profiles.back()).dump(2) + "\n");
  for (long j = 0; j < cfg.log_episodes; ++j) {
    Rng rng(derive_seed(cfg.seed, 1000000 + static_cast<std::uint64_t>(j)));
    Episode ep = engine.sample_episode(traj.profiles.back(), rng);
    std::ostringstream ecsv;
    io::write_episode_csv(ecsv, sc.spec, ep);
    emit(dir, "episode_" + std::to_string(j) + ".csv", ecsv.str());
  }
  json schedule;
  if (!cfg.exact) schedule["trajectory_stream"] = "derive_seed(master, 0)";
  if (cfg.log_episodes > 0) schedule["episode_log[j]"] = "derive_seed(master, 1000000 + j)";
  emit_manifest(dir, cfg, sc, schedule);

  const TrajectoryStep& last = traj.steps.back();
  std::printf("simulate: %s %s, %ld steps%s, final gradient_norm %.3g\n", sc.name.c_str(),
              cfg.exact ? "exact" : "stochastic", traj.steps_taken,
              traj.stopped_early ? " (stopped early)" : "", last.grad_norm);
  if (target_ptr) std::printf("  final distance_to_target %.6g\n", last.dist_to_target);
  if (!last.values.empty()) {
    std::printf("  final values:");
    for (double v : last.values) std::printf(" %.6g", v);
    std::printf("\n");
  }
  return 0;
}

int run_check_eq(const ExperimentConfig& cfg) {
  Scenario sc = resolve_scenario(cfg);
  ValueEngine engine(sc.spec);
  MetaGame meta = build_meta_game(engine, Parallel::omp);
  StrategyProfile pi =
      resolve_profile(engine, sc, cfg.profile, {"reference", "grim", "all_d"});
  EquilibriumReport rep = check_strict(engine, meta, pi);

  json out;
  out["is_equilibrium"] = rep.is_equilibrium;
  out["is_strict"] = rep.is_strict;
  out["value"] = rep.value;
  out["worst_player"] = rep.worst_player;
  out["worst_strategy"] = rep.worst_strategy;
  out["worst_gain"] = rep.worst_gain;
  out["worst_in_class"] = rep.worst_in_class;
  if (std::isfinite(rep.min_losing_margin)) out["min_losing_margin"] = rep.min_losing_margin;
  json schedule;
  if (cfg.variational) {
    VariationalReport var = check_variational(engine, meta, pi, cfg.q, cfg.var_eps,
                                              static_cast<int>(cfg.samples), cfg.seed);
    json v;
    v["c1_holds"] = var.c1_holds;
    v["c1_value"] = var.c1_value;
    v["c2_holds"] = var.c2_holds;
    v["c2_worst"] = var.c2_worst;
    v["c2_samples"] = var.c2_samples;
    v["c2_excluded"] = var.c2_excluded;
    v["epsilon_used"] = var.epsilon_used;
    out["variational"] = v;
    schedule["variational_rung[r]"] = "derive_seed(master, r)";
  }

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  emit(dir, "check_eq.json", out.dump(2) + "\n");
  emit_manifest(dir, cfg, sc, schedule);

  std::printf("check-eq: %s -> %s (worst gain %.6g%s)\n", sc.name.c_str(),
              rep.is_strict ? "strict equilibrium"
                            : (rep.is_equilibrium ? "equilibrium, not strict" : "not an equilibrium"),
              rep.worst_gain, rep.worst_in_class ? ", in-class" : "");
  return rep.is_strict ? 0 : 1;
}

int run_folk_set(const ExperimentConfig& cfg) {
  Scenario sc = resolve_scenario(cfg);
  PayoffGeometry geo = feasible_ir_set(sc.spec.game, ir_variant_of(cfg.set_variant));

  json out;
  out["variant"] = to_string(geo.variant);
  out["hull_vertices"] = geo.hull_vertices;
  out["minmax_mixed"] = geo.minmax_mixed;
  out["minmax_pure"] = geo.minmax_pure;
  out["minmax_approximate"] = geo.minmax_approximate;
  json verdicts = json::array();
  for (const std::string& ptext : cfg.points) {
    std::vector<double> u;
    std::stringstream ss(ptext);
    std::string tok;
    while (std::getline(ss, tok, ',')) u.push_back(std::stod(tok));
    if (u.size() != static_cast<std::size_t>(sc.spec.game.players))
      throw std::invalid_argument("point '" + ptext + "' needs one coordinate per player");
    json v;
    v["point"] = u;
    v["in_set"] = geo.contains(u);
    verdicts.push_back(std::move(v));
  }
  out["points"] = std::move(verdicts);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  emit(dir, "folk_set.json", out.dump(2) + "\n");
  emit_manifest(dir, cfg, sc, json::object());

  std::printf("folk-set: %s, %zu hull vertices, minmax_mixed (", to_string(geo.variant).c_str(),
              geo.hull_vertices.size());
  for (std::size_t i = 0; i < geo.minmax_mixed.size(); ++i)
    std::printf("%s%.6g", i ? ", " : "", geo.minmax_mixed[i]);
  std::printf(")\n");
  for (const auto& v : out["points"])
    std::printf("  point %s -> %s\n", v["point"].dump().c_str(),
                v["in_set"].get<bool>() ? "inside" : "outside");
  return 0;
}

int run_basin(const ExperimentConfig& cfg) {
  Scenario sc = resolve_scenario(cfg);
  ValueEngine engine(sc.spec);
  MetaGame meta = build_meta_game(engine, Parallel::omp);
  StrategyProfile target =
      resolve_profile(engine, sc, cfg.target, {"grim", "reference", "all_d"});

  EpsilonGreedyConfig ecfg;
  ecfg.dyn = dynamics_config(cfg);
  ecfg.epsilon = cfg.epsilon;
  ecfg.variant = variant_of(cfg.estimator);
  BasinResult res =
      basin_experiment(engine, meta, target, cfg.radius, cfg.seeds, ecfg, !cfg.exact, cfg.seed,
                       cfg.threshold, Parallel::omp, cfg.target.empty() ? "target" : cfg.target);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ostringstream bcsv;
  io::write_basin_csv(bcsv, res);
  emit(dir, "basin.csv", bcsv.str());
  json schedule;
  schedule["start[k]"] = "derive_seed(master, 2k)";
  if (!cfg.exact) schedule["episode_stream[k]"] = "derive_seed(master, 2k + 1)";
  emit_manifest(dir, cfg, sc, schedule);

  if (!res.target_strict)
    std::printf("warning: target is not a certified strict equilibrium\n");
  std::printf("basin: %s %s, %ld/%ld runs converged (threshold %.3g), mean final distance %.6g\n",
              sc.name.c_str(), res.stochastic ? "stochastic" : "exact", res.converged, res.seeds,
              res.threshold, res.mean_final_distance);
  return 0;
}

int run_meta_game(const ExperimentConfig& cfg) {
  Scenario sc = resolve_scenario(cfg);
  ValueEngine engine(sc.spec);
  MetaGame meta = build_meta_game(engine, Parallel::omp);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ostringstream txt;
  io::write_meta_game(txt, engine, meta);
  emit(dir, "meta_game.txt", txt.str());
  emit_manifest(dir, cfg, sc, json::object());

  std::printf("meta-game: %s, %zu joint pure profiles\n", sc.name.c_str(), meta.joint.count());
  return 0;
}

int run_diagnose(const ExperimentConfig& cfg) {
  Scenario sc = resolve_scenario(cfg);
  ValueEngine engine(sc.spec);
  MetaGame meta = build_meta_game(engine, Parallel::omp);
  StrategyProfile start = resolve_profile(engine, sc, cfg.profile, {""});

  // the pi^n sequence: exact-dynamics checkpoints from the start profile
  QReplicatorConfig dyn = dynamics_config(cfg);
  if (cfg.record_every <= 0) dyn.record_every = std::max(1L, cfg.episodes / 20);
  Trajectory traj = run_exact(engine, meta, start, dyn, nullptr);

  EpsilonGreedyConfig ecfg;
  ecfg.dyn = dyn;
  ecfg.epsilon = cfg.epsilon;
  ecfg.variant = variant_of(cfg.estimator);
  NoiseDiagnostics diag = diagnose_noise(engine, meta, traj.profiles,
                                         static_cast<int>(cfg.diag_samples), ecfg, cfg.seed,
                                         Parallel::omp);

  const fs::path dir(cfg.out);
  fs::create_directories(dir);
  std::ostringstream dcsv;
  io::write_diagnostics_csv(dcsv, diag);
  emit(dir, "diagnostics.csv", dcsv.str());
  json schedule;
  schedule["sample[step,s]"] = "derive_seed(master, step * samples_per_step + s)";
  emit_manifest(dir, cfg, sc, schedule);

  std::printf("diagnose: %s %s, %zu steps x %d samples\n", sc.name.c_str(),
              to_string(diag.variant), diag.steps.size(), diag.samples_per_step);
  std::printf("  l_sigma %.4g, l_b %.4g, p %.4g; p - l_sigma > 1/2: %s; p + l_b > 1: %s\n",
              diag.l_sigma, diag.l_b, diag.p_used, diag.sigma_ok ? "yes" : "no",
              diag.bias_ok ? "yes" : "no");
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  ExperimentConfig cfg;
  CLI::App app{"finite-recall repeated games: q-replicator learning, equilibrium "
               "certification, payoff geometry"};
  app.require_subcommand(1);
  std::vector<Bind> binds;

  CLI::App* subs[6];
  CLI::Option* delta_opts[6];
  const char* names[6] = {"simulate", "check-eq", "folk-set", "basin", "meta-game", "diagnose"};
  const char* descs[6] = {
      "run the q-replicator dynamics and emit trajectory/summary CSVs",
      "certify a profile as a strict equilibrium (exit 0 strict, 1 not)",
      "feasible & individually rational payoff geometry + point queries",
      "batch basin-of-attraction experiment around a target profile",
      "export the enumerated meta-game payoff tensor as structured text",
      "REINFORCE bias/variance diagnostics along an exact trajectory"};

  for (int k = 0; k < 6; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], descs[k]);
    subs[k] = sub;
    bind_opt(binds, sub, "--scenario", "scenario", cfg.scenario,
             "pd_standard | pd_variant_noisy(e1,e2,e3) | matching_pennies");
    bind_opt(binds, sub, "--game", "game", cfg.game_path, "JSON game file");
    delta_opts[k] = bind_opt(binds, sub, "--delta", "delta", cfg.delta,
                             "continuation probability override");
    bind_opt(binds, sub, "--recall", "recall", cfg.recall,
             "recall override (one value broadcasts)");
    bind_opt(binds, sub, "--out", "out", cfg.out, "output directory");
    bind_opt(binds, sub, "--seed", "seed", cfg.seed, "master seed");
    bind_opt(binds, sub, "--threads", "threads", cfg.threads, "OpenMP thread cap (0 = default)");
    sub->add_option("--config", cfg.config_path,
                    "JSON config file; fills flags not set on the command line");
  }

  auto add_dynamics = [&](CLI::App* sub) {
    bind_opt(binds, sub, "--q", "q", cfg.q, "q-gradient exponent (>= 0)");
    bind_opt(binds, sub, "--gamma", "gamma", cfg.gamma, "base step size");
    bind_opt(binds, sub, "--p", "p", cfg.p, "step decay power in (1/2, 1]");
    bind_opt(binds, sub, "--m", "m", cfg.m, "step decay offset (> 0)");
    bind_opt(binds, sub, "--episodes", "episodes", cfg.episodes, "update steps / episodes");
    bind_opt(binds, sub, "--record-every", "record_every", cfg.record_every,
             "trajectory thinning (0 = auto)");
  };
  auto add_estimator = [&](CLI::App* sub) {
    bind_opt(binds, sub, "--epsilon", "epsilon", cfg.epsilon, "exploration rate in (0, 1)");
    bind_opt(binds, sub, "--estimator", "estimator", cfg.estimator,
             "pure_score | paper_literal");
  };

  // simulate
  add_dynamics(subs[0]);
  add_estimator(subs[0]);
  bind_flag(binds, subs[0], "--exact", "exact", cfg.exact, "exact gradient instead of REINFORCE");
  bind_opt(binds, subs[0], "--profile", "profile", cfg.profile,
           "start profile (reference name or file; default uniform)");
  bind_opt(binds, subs[0], "--target", "target", cfg.target,
           "distance target (reference name or file)");
  bind_opt(binds, subs[0], "--log-episodes", "log_episodes", cfg.log_episodes,
           "sample this many episodes under the final profile");

  // check-eq
  bind_opt(binds, subs[1], "--profile", "profile", cfg.profile,
           "profile to certify (default: scenario reference)");
  bind_opt(binds, subs[1], "--q", "q", cfg.q, "q used by the variational check");
  bind_flag(binds, subs[1], "--variational", "variational", cfg.variational,
            "also run the variational C'(i)/C'(ii) certificate");
  bind_opt(binds, subs[1], "--samples", "samples", cfg.samples,
           "variational samples per ladder rung");
  bind_opt(binds, subs[1], "--var-eps", "var_eps", cfg.var_eps,
           "variational neighborhood radius (ladder base)");

  // folk-set
  bind_opt(binds, subs[2], "--set", "set", cfg.set_variant, "mixed | strict | pure");
  bind_opt(binds, subs[2], "--point", "points", cfg.points,
           "query payoff vector \"u0,u1,...\" (repeatable)");

  // basin
  add_dynamics(subs[3]);
  add_estimator(subs[3]);
  bind_flag(binds, subs[3], "--exact", "exact", cfg.exact, "exact-dynamics basin");
  bind_opt(binds, subs[3], "--target", "target", cfg.target,
           "target profile (reference name or file; default grim/reference)");
  bind_opt(binds, subs[3], "--radius", "radius", cfg.radius, "start-ball radius");
  bind_opt(binds, subs[3], "--seeds", "seeds", cfg.seeds, "number of runs");
  bind_opt(binds, subs[3], "--threshold", "threshold", cfg.threshold,
           "class distance counting as converged");

  // diagnose
  add_dynamics(subs[5]);
  add_estimator(subs[5]);
  bind_opt(binds, subs[5], "--profile", "profile", cfg.profile,
           "start profile for the checkpoint sequence (default uniform)");
  bind_opt(binds, subs[5], "--samples", "diag_samples", cfg.diag_samples,
           "estimator samples per step (>= 30)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = nullptr;
  for (int k = 0; k < 6; ++k)
    if (subs[k]->parsed()) {
      active = subs[k];
      cfg.mode = names[k];
      cfg.delta_set = delta_opts[k]->count() > 0;
    }

  try {
    if (!cfg.config_path.empty()) {
      const json conf = json::parse(io::read_text(cfg.config_path));
      if (!conf.is_object()) throw std::invalid_argument("config file: not a JSON object");
      for (const auto& [key, value] : conf.items()) {
        bool known = false;
        for (const Bind& b : binds) {
          if (b.sub != active || b.key != key) continue;
          known = true;
          if (b.opt->count() == 0) {
            b.load(value);
            if (key == "delta") cfg.delta_set = true;
          }
          break;
        }
        if (!known)
          throw std::invalid_argument("config file: unknown key '" + key + "' for mode " +
                                      cfg.mode);
      }
    }
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    if (cfg.mode == "simulate") return run_simulate(cfg);
    if (cfg.mode == "check-eq") return run_check_eq(cfg);
    if (cfg.mode == "folk-set") return run_folk_set(cfg);
    if (cfg.mode == "basin") return run_basin(cfg);
    if (cfg.mode == "meta-game") return run_meta_game(cfg);
    if (cfg.mode == "diagnose") return run_diagnose(cfg);
    throw std::invalid_argument("unknown mode");
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace qrd::cli

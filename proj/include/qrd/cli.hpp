#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qrd::cli {

// Resolved experiment configuration: one subcommand (= mode) plus the merged
// flag/config-file values. Flags set on the command line win over the
// config file; the file fills everything left unset.
struct ExperimentConfig {
  std::string mode;
  std::string scenario;   // scenario text, e.g. "pd_variant_noisy(0.01,0.01,0.01)"
  std::string game_path;  // JSON game file (exclusive with scenario)
  std::string profile;    // start/check profile: reference name or file path
  std::string target;     // target profile: reference name or file path
  std::string out = "out";
  std::string estimator = "pure_score";  // pure_score | paper_literal
  std::string set_variant = "mixed";     // folk-set: mixed | strict | pure
  std::string config_path;
  std::vector<std::string> points;  // folk-set query points, "u0,u1,..."

  double q = 1.0;
  double gamma = 0.1;
  double p = 0.6;
  double m = 10.0;
  double epsilon = 0.05;
  double radius = 0.02;
  double threshold = 0.05;
  double var_eps = 0.05;  // check-eq variational ladder base
  double delta = 0.0;
  bool delta_set = false;
  std::vector<int> recall;  // empty = keep scenario/file default; size 1 broadcasts

  long episodes = 5000;
  long seeds = 100;
  long record_every = 0;  // 0 = auto (episodes/100, at least 1)
  long log_episodes = 0;  // simulate: sampled-episode CSVs under the final profile
  long samples = 1000;    // check-eq variational samples per rung
  long diag_samples = 100;  // diagnose estimator samples per step
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = leave the OpenMP default

  bool exact = false;
  bool variational = false;
};

// Full command-line entry point (parse + dispatch + emit). Exit codes:
//   0  success (check-eq: profile is a strict equilibrium)
//   1  check-eq only: valid run, profile not strict
//   2  validation/usage failure
//   3  capacity error (recall cannot encode, enumeration over cap)
int run(int argc, const char* const* argv);

}  // namespace qrd::cli

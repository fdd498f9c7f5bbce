#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "qrd/behavioural.hpp"
#include "qrd/estimator.hpp"
#include "qrd/folk.hpp"

namespace qrd::io {

inline constexpr const char* kVersion = "v0.1.0";

// Fixed-width float formatting for CSV bodies: printf %.17g, enough digits to
// round-trip an IEEE double, independent of locale and library version.
std::string fmt17(double v);

std::string read_text(const std::string& path);
// Binary-mode write ("\n" line ends everywhere) so re-runs are byte-identical.
void write_text(const std::string& path, const std::string& body);

// ---------------------------------------------------------------------------
// Game files (JSON).
//
//   {
//     "action_names": [["C","D"],["C","D"]],
//     "payoffs":      [[2,0,3,1],[2,3,0,1]],       per player, profile-major
//     "monitoring":   "perfect"
//                   | {"signal_counts":[2,2],
//                      "signal_names":[["c","d"],["c","d"]]   (optional)
//                      "kernel":[[...],...]},      per profile, joint-signal major
//     "delta":  0.9,
//     "recall": [1,1]                              or a single integer
//   }
//
// Distributions are renormalized when |sum - 1| <= 1e-9 and rejected
// otherwise (the shared ingest rule; see normalize_weights).
// ---------------------------------------------------------------------------
nlohmann::json game_to_json(const RepeatedGameSpec& spec);
RepeatedGameSpec game_from_json(const nlohmann::json& j);
RepeatedGameSpec load_game(const std::string& path);
void save_game(const RepeatedGameSpec& spec, const std::string& path);

// Shared ingest rule for any probability vector read from disk: finite
// entries, tiny negatives (>= -1e-12) clamped to zero, sum within 1e-9 of 1
// renormalized to machine precision, anything else rejected.
void normalize_weights(std::vector<double>& w, const std::string& what);

// ---------------------------------------------------------------------------
// Private-window labels: entries oldest-first, "action:signal" joined by ";",
// the empty window is "". Example (1-recall perfect-monitoring PD): "C:CC".
// ---------------------------------------------------------------------------
std::string history_label(const ValueEngine& engine, int player, int history_id);
int history_id_from_label(const ValueEngine& engine, int player, const std::string& label);

// ---------------------------------------------------------------------------
// Strategy-profile files (JSON). Each player is one of
//   {"player":0, "weights":[...]}           simplex weights, enumerated order
//   {"player":0, "pure_index": 17}          vertex by pure-strategy index
//   {"player":0, "table": {"":"C", "C:CC":"C", "default":"D"}}
//                                           named pure table, window -> action
// "default" covers windows not listed explicitly (required if any is absent).
// ---------------------------------------------------------------------------
nlohmann::json profile_to_json(const ValueEngine& engine, const StrategyProfile& pi);
StrategyProfile profile_from_json(const ValueEngine& engine, const nlohmann::json& j);
StrategyProfile load_profile(const ValueEngine& engine, const std::string& path);
void save_profile(const ValueEngine& engine, const StrategyProfile& pi, const std::string& path);

// Behavioural tables share the container: per player either
//   {"player":0, "rows": {"": [1,0], "CC": [1,0], "default": [0,1]}}
// keyed by public-window labels (profile names joined by ";"), or
//   {"player":0, "rows": [[...], ...]}      one row per window id.
nlohmann::json behavioural_to_json(const BehaviouralEngine& engine, const BehaviouralProfile& pi);
BehaviouralProfile behavioural_from_json(const BehaviouralEngine& engine, const nlohmann::json& j);
BehaviouralProfile load_behavioural(const BehaviouralEngine& engine, const std::string& path);

// Public-window labels for the behavioural engine: action-profile names
// (per-player action names concatenated) joined by ";"; empty window is "".
std::string public_window_label(const BehaviouralEngine& engine, int window_id);

// ---------------------------------------------------------------------------
// CSV emitters. Column contracts (headers written exactly as listed):
//   trajectory:  n,player,component,weight          long format, one row per
//                                                   recorded mixed weight
//   summary:     n,gradient_norm,distance_to_target[,value_0..]
//   basin:       seed,converged,final_distance,episodes_used
//   episodes:    period,action_0..,signal_0..,reward_0..   one episode/file
//   diagnostics: n,second_moment,bias_matched,bias_true    with '#' header
//                lines carrying the estimator variant and fitted exponents
// ---------------------------------------------------------------------------
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_summary_csv(std::ostream& os, const Trajectory& traj);
void write_basin_csv(std::ostream& os, const BasinResult& res);
void write_episode_csv(std::ostream& os, const RepeatedGameSpec& spec, const Episode& ep);
void write_diagnostics_csv(std::ostream& os, const NoiseDiagnostics& d);

// Binary-free structured-text dump of the meta-game: per player the window
// labels and every pure strategy's action table (enumeration order), then one
// line per joint pure profile with the exact per-player values.
void write_meta_game(std::ostream& os, const ValueEngine& engine, const MetaGame& meta);

// Run manifest: version string, master seed, the derived-seed schedule, and
// the full resolved config. The only place a timestamp appears.
nlohmann::json make_manifest(const nlohmann::json& config_snapshot, std::uint64_t master_seed,
                             const nlohmann::json& seed_schedule);

}  // namespace qrd::io

#pragma once

#include "qrd/dynamics.hpp"

namespace qrd {

// Two score flavours are shipped because the per-period conditional
// log-derivative presumes a behavioural factorisation that mixed strategies
// do not have:
//   pure_score    - coordinate e gets d log P(own actions)/d pi_{i,e}
//                   = L_i(e) / sum_e' pi_{i,e'} L_i(e'), with
//                   L_i(e) = prod_t [(1-eps) 1{e(h_t) = a_t} + eps/|A_i|]
//                   the exact likelihood of the realised own-action sequence
//                   had e been the drawn pure strategy. Unbiased for the
//                   gradient of the eps-greedy-executed value.
//   paper_literal - the textbook per-period form sum_t d log pi_hat(a_t|h_t),
//                   reading pi_hat(a|h) as the static mixture conditional
//                   (1-eps) m(a|h) + eps/|A_i|, m(a|h) = sum_e pi_e 1{e(h) = a}.
//                   Kept for conformance; biased whenever a window can be
//                   visited more than once.
enum class ScoreVariant { pure_score, paper_literal };

inline const char* to_string(ScoreVariant v) {
  return v == ScoreVariant::pure_score ? "pure_score" : "paper_literal";
}

struct EpsilonGreedyConfig {
  QReplicatorConfig dyn;
  double epsilon = 0.05;  // exploration rate in (0, 1)
  ScoreVariant variant = ScoreVariant::pure_score;

  void validate(int players) const;
};

struct ScoreRecord {
  std::vector<double> reward;              // R_i(h)
  std::vector<std::vector<double>> score;  // Lambda_i over pure strategies
};

// eps-greedy weight vector pi_hat = (1-eps) pi + eps/|E_i| (the execution law
// read in mixed coordinates; these weights feed the q-combination)
std::vector<double> greedy_weights(const MixedStrategy& pi, double eps);

// Replays the episode against each player's window space and evaluates the
// chosen variant's score vector. Likelihoods are accumulated in log space
// from per-(window, action) visit counts.
ScoreRecord score_from_episode(const ValueEngine& engine, const StrategyProfile& pi,
                               const Episode& episode, double eps, ScoreVariant variant);

// REINFORCE estimate: v_hat = R * Lambda, then the q-combination under w.
std::vector<double> reinforce(double reward, const std::vector<double>& lambda,
                              const std::vector<double>& w, double q);

// Stochastic learning loop: per episode draw h under eps-greedy execution of
// pi^n, score it, estimate v_hat per player, projected step. Deterministic
// given the seed (one generator, documented draw order in Episode). Recorded
// values require a meta-game; pass nullptr to skip them.
Trajectory run_stochastic(const ValueEngine& engine, StrategyProfile pi,
                          const EpsilonGreedyConfig& cfg, std::uint64_t seed,
                          const StrategyProfile* target = nullptr,
                          const MetaGame* meta = nullptr);

// Empirical estimator-noise diagnostics along a profile sequence. At step n
// the noise is U = v_hat - E[v_hat] and the bias is measured twice:
//   bias_matched - against the exact q-gradient of the eps-executed value
//                  (what the estimator actually targets; ~0 for pure_score),
//   bias_true    - against the exact q-gradient of the unperturbed value
//                  (the drift term the convergence analysis bounds).
// Power-law fits: E||U||^2 ~ n^(2 l_sigma), bias_true ~ n^(-l_b); the report
// states whether p - l_sigma > 1/2 and p + l_b > 1 hold for the configured p.
struct NoiseDiagnostics {
  std::vector<long> steps;
  std::vector<double> second_moment;  // E||U||^2
  std::vector<double> bias_matched;
  std::vector<double> bias_true;
  double l_sigma = 0.0;
  double l_b = 0.0;
  double p_used = 0.0;
  bool sigma_ok = false;  // p - l_sigma > 1/2
  bool bias_ok = false;   // p + l_b > 1
  int samples_per_step = 0;
  ScoreVariant variant = ScoreVariant::pure_score;
};

// Moment/fit layer, separated so tests can feed synthetic estimator samples
// (e.g. the exact gradient as its own estimator -> zero bias, zero variance).
// vhat[k] = k-th sampled per-player gradient estimate at this step.
NoiseDiagnostics diagnose_noise_from_samples(
    const std::vector<std::vector<std::vector<std::vector<double>>>>& vhat,  // [step][sample][i][a]
    const std::vector<std::vector<std::vector<double>>>& matched_ref,        // [step][i][a]
    const std::vector<std::vector<std::vector<double>>>& true_ref, double p);

// Samples `samples_per_step` REINFORCE estimates at every profile of the
// sequence (per-sample derived seeds, index-addressed: identical in both
// Parallel modes) and fits the exponents.
NoiseDiagnostics diagnose_noise(const ValueEngine& engine, const MetaGame& meta,
                                const std::vector<StrategyProfile>& pis, int samples_per_step,
                                const EpsilonGreedyConfig& cfg, std::uint64_t seed,
                                Parallel par = Parallel::omp);

}  // namespace qrd

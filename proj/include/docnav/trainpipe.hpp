#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "docnav/corpus.hpp"
#include "docnav/protocol.hpp"

namespace docnav {

enum class FilterReason { Ok, Format, Answer, Evidence };
std::string to_string(FilterReason reason);

struct FilterScores {
  double anls = 0.0;  // best-gold similarity of the final answer
  bool em = false;    // normalized exact match against any gold
  int overlap = 0;    // |P_rel intersect P_gt|
};

struct FilterDecision {
  bool keep = false;
  FilterReason reason = FilterReason::Format;
  FilterScores scores;
};

// Optional external judge callbacks; when absent (the default) the gate
// outcome stands. A judge returning true overrides a failed gate.
struct FilterHooks {
  std::function<bool(const Trajectory&, const QAItem&)> answer_judge;
  std::function<bool(const Trajectory&, const QAItem&)> evidence_judge;
};

// Imitation-data gates, applied in order: format validity, answer
// correctness (freeform: best-gold similarity >= tau_anls; identifier: exact
// match; unanswerable: explicit abstention), then evidence sanity (P_rel
// must intersect P_gt; skipped for unanswerable items).
FilterDecision filter_trajectory(const Trajectory& traj, const QAItem& qa, double tau_anls = 0.7,
                                 const FilterHooks& hooks = {});

// One serialized rollout. In raw mode only the log-prob/mask arrays matter;
// `tokens` carries vocabulary ids when a ToyPolicy fills logp_new.
struct TokenSeq {
  std::vector<int> tokens;
  std::vector<std::uint8_t> mask;  // 1 marks agent-generated tokens
  std::vector<double> logp_old;
  std::vector<double> logp_new;
  int group = 0;
};

struct TokenBatch {
  std::vector<TokenSeq> seqs;
};

// Masked negative log-likelihood: -sum of logp_new over masked positions,
// summed per sequence and averaged over the batch.
double masked_nll(const TokenBatch& batch);

enum class Difficulty { Easy, Medium, Hard };
std::string to_string(Difficulty d);

// From the number of successful rollouts out of 4: 4 -> easy, 1..3 -> medium,
// 0 -> hard.
Difficulty difficulty_bucket(int successes);

struct BucketSets {
  std::vector<std::string> easy;
  std::vector<std::string> medium;
  std::vector<std::string> hard;
};

struct StratifiedSample {
  std::vector<std::string> ids;
  std::vector<std::string> log;  // backfill notes
};

// Draws exactly n ids with target proportions resolved by largest-remainder
// rounding; shortfall in a bucket is backfilled from the others (and logged).
StratifiedSample stratified_sample(const BucketSets& buckets, int n,
                                   std::array<double, 3> proportions = {0.10, 0.70, 0.20},
                                   std::uint64_t rng_seed = 0);

// Group-normalized advantages A_i = (R_i - mean) / (population std + eps).
std::vector<double> group_advantages(const std::vector<double>& rewards, double eps = 1e-8);

// Token-level clipped surrogate, masked tokens only:
//   L_g = -(1/G) sum_i sum_t min(rho*A_i, clip(rho, 1-eps_c, 1+eps_c)*A_i)
// with rho = exp(logp_new - logp_old); the result is the mean of L_g over
// the groups present in the batch. `advantages` aligns with batch.seqs.
double grpo_objective(const TokenBatch& batch, const std::vector<double>& advantages,
                      double clip_eps = 0.2);

// Position-independent softmax policy over a small vocabulary. Exists to
// gradient-check the objectives against central finite differences.
class ToyPolicy {
 public:
  explicit ToyPolicy(std::vector<double> params);

  int vocab_size() const { return static_cast<int>(params_.size()); }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& params() { return params_; }

  std::vector<double> log_probs() const;  // log softmax of params
  void fill_logp_new(TokenBatch& batch) const;

  // Analytic d masked_nll / d params (batch logp_new implied by this policy).
  std::vector<double> masked_nll_grad(const TokenBatch& batch) const;
  // Analytic d grpo_objective / d params; logp_old in the batch stays fixed.
  std::vector<double> grpo_grad(const TokenBatch& batch, const std::vector<double>& advantages,
                                double clip_eps = 0.2) const;

 private:
  std::vector<double> params_;
};

}  // namespace docnav

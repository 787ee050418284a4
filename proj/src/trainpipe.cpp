#include "docnav/trainpipe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "docnav/rewards.hpp"
#include "docnav/rng.hpp"

namespace docnav {

std::string to_string(FilterReason reason) {
  switch (reason) {
    case FilterReason::Ok: return "ok";
    case FilterReason::Format: return "format";
    case FilterReason::Answer: return "answer";
    case FilterReason::Evidence: return "evidence";
  }
  return "format";
}

std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
  }
  return "medium";
}

FilterDecision filter_trajectory(const Trajectory& traj, const QAItem& qa, double tau_anls,
                                 const FilterHooks& hooks) {
  FilterDecision decision;
  const std::string pred = traj.final_answer.value_or("");
  for (const auto& gold : qa.gold_answers) decision.scores.anls = std::max(decision.scores.anls, nls(pred, gold));
  for (const auto& gold : qa.gold_answers) {
    if (normalize_answer(pred) == normalize_answer(gold)) decision.scores.em = true;
  }
  const auto p_rel = relevant_pages_union(traj);
  for (int p : p_rel) decision.scores.overlap += static_cast<int>(qa.evidence_pages.count(p));

  if (!validate_trajectory(traj).valid || !traj.final_answer) {
    decision.reason = FilterReason::Format;
    return decision;
  }

  bool answer_ok = false;
  switch (qa.answer_kind) {
    case AnswerKind::Freeform: answer_ok = decision.scores.anls >= tau_anls; break;
    case AnswerKind::Identifier: answer_ok = decision.scores.em; break;
    case AnswerKind::Unanswerable: answer_ok = normalize_answer(pred) == kNotAnswerable; break;
  }
  if (!answer_ok && hooks.answer_judge) answer_ok = hooks.answer_judge(traj, qa);
  if (!answer_ok) {
    decision.reason = FilterReason::Answer;
    return decision;
  }

  if (qa.answer_kind != AnswerKind::Unanswerable) {
    bool evidence_ok = decision.scores.overlap > 0;
    if (!evidence_ok && hooks.evidence_judge) evidence_ok = hooks.evidence_judge(traj, qa);
    if (!evidence_ok) {
      decision.reason = FilterReason::Evidence;
      return decision;
    }
  }

  decision.keep = true;
  decision.reason = FilterReason::Ok;
  return decision;
}

namespace {

void check_aligned(const TokenSeq& seq) {
  if (seq.mask.size() != seq.logp_new.size()) {
    throw std::invalid_argument("token sequence: mask/logp_new length mismatch");
  }
}

}  // namespace

double masked_nll(const TokenBatch& batch) {
  if (batch.seqs.empty()) throw std::invalid_argument("masked_nll: empty batch");
  double total = 0.0;
  for (const TokenSeq& seq : batch.seqs) {
    check_aligned(seq);
    double seq_loss = 0.0;
    for (std::size_t i = 0; i < seq.mask.size(); ++i) {
      if (seq.mask[i]) seq_loss -= seq.logp_new[i];
    }
    total += seq_loss;
  }
  return total / static_cast<double>(batch.seqs.size());
}

Difficulty difficulty_bucket(int successes) {
  if (successes < 0 || successes > 4) {
    throw std::invalid_argument("difficulty_bucket: successes must lie in 0..4");
  }
  if (successes == 4) return Difficulty::Easy;
  if (successes == 0) return Difficulty::Hard;
  return Difficulty::Medium;
}

StratifiedSample stratified_sample(const BucketSets& buckets, int n,
                                   std::array<double, 3> proportions, std::uint64_t rng_seed) {
  if (n < 0) throw std::invalid_argument("stratified_sample: n must be >= 0");
  const std::array<const std::vector<std::string>*, 3> pools = {&buckets.easy, &buckets.medium,
                                                                &buckets.hard};
  const std::array<std::string, 3> names = {"easy", "medium", "hard"};
  const std::size_t available =
      buckets.easy.size() + buckets.medium.size() + buckets.hard.size();
  if (static_cast<std::size_t>(n) > available) {
    throw std::invalid_argument("stratified_sample: n exceeds available items");
  }

  // Largest-remainder rounding so targets sum to exactly n.
  std::array<int, 3> target{};
  std::array<double, 3> remainder{};
  int assigned = 0;
  for (int b = 0; b < 3; ++b) {
    const double exact = n * proportions[static_cast<std::size_t>(b)];
    target[static_cast<std::size_t>(b)] = static_cast<int>(std::floor(exact));
    remainder[static_cast<std::size_t>(b)] = exact - std::floor(exact);
    assigned += target[static_cast<std::size_t>(b)];
  }
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
  });
  for (int i = 0; assigned < n; ++i) {
    ++target[static_cast<std::size_t>(order[static_cast<std::size_t>(i % 3)])];
    ++assigned;
  }

  StratifiedSample sample;
  Rng rng(rng_seed);
  std::array<std::vector<std::string>, 3> shuffled;
  for (int b = 0; b < 3; ++b) {
    shuffled[static_cast<std::size_t>(b)] = *pools[static_cast<std::size_t>(b)];
    rng.shuffle(shuffled[static_cast<std::size_t>(b)]);
  }

  std::array<int, 3> take{};
  for (int b = 0; b < 3; ++b) {
    take[static_cast<std::size_t>(b)] = std::min(
        target[static_cast<std::size_t>(b)],
        static_cast<int>(shuffled[static_cast<std::size_t>(b)].size()));
  }
  // Backfill deficits from the other buckets' spare capacity, nearest first
  // (hard borrows from medium then easy; easy from medium then hard; medium
  // from easy then hard).
  const std::array<std::array<int, 2>, 3> neighbors = {{{1, 2}, {0, 2}, {1, 0}}};
  for (int b = 0; b < 3; ++b) {
    int deficit = target[static_cast<std::size_t>(b)] - take[static_cast<std::size_t>(b)];
    for (int nb : neighbors[static_cast<std::size_t>(b)]) {
      if (deficit == 0) break;
      const int spare = static_cast<int>(shuffled[static_cast<std::size_t>(nb)].size()) -
                        take[static_cast<std::size_t>(nb)];
      const int moved = std::min(deficit, spare);
      if (moved > 0) {
        take[static_cast<std::size_t>(nb)] += moved;
        deficit -= moved;
        sample.log.push_back(names[static_cast<std::size_t>(b)] + " shortfall of " +
                             std::to_string(moved) + " backfilled from " +
                             names[static_cast<std::size_t>(nb)]);
      }
    }
  }

  for (int b = 0; b < 3; ++b) {
    for (int i = 0; i < take[static_cast<std::size_t>(b)]; ++i) {
      sample.ids.push_back(shuffled[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)]);
    }
  }
  return sample;
}

std::vector<double> group_advantages(const std::vector<double>& rewards, double eps) {
  if (rewards.empty()) throw std::invalid_argument("group_advantages: empty group");
  const double mean =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rewards.size());  // population variance
  const double sd = std::sqrt(var);
  std::vector<double> advantages;
  advantages.reserve(rewards.size());
  for (double r : rewards) advantages.push_back((r - mean) / (sd + eps));
  return advantages;
}

double grpo_objective(const TokenBatch& batch, const std::vector<double>& advantages,
                      double clip_eps) {
  if (batch.seqs.size() != advantages.size()) {
    throw std::invalid_argument("grpo_objective: advantages must align with sequences");
  }
  if (batch.seqs.empty()) throw std::invalid_argument("grpo_objective: empty batch");

  std::vector<int> group_ids;
  for (const TokenSeq& seq : batch.seqs) {
    if (std::find(group_ids.begin(), group_ids.end(), seq.group) == group_ids.end()) {
      group_ids.push_back(seq.group);
    }
  }

  double loss_sum = 0.0;
  for (int gid : group_ids) {
    double group_term = 0.0;
    int group_size = 0;
    for (std::size_t i = 0; i < batch.seqs.size(); ++i) {
      const TokenSeq& seq = batch.seqs[i];
      if (seq.group != gid) continue;
      check_aligned(seq);
      if (seq.logp_old.size() != seq.logp_new.size()) {
        throw std::invalid_argument("grpo_objective: logp_old/logp_new length mismatch");
      }
      ++group_size;
      const double advantage = advantages[i];
      for (std::size_t t = 0; t < seq.mask.size(); ++t) {
        if (!seq.mask[t]) continue;
        const double ratio = std::exp(seq.logp_new[t] - seq.logp_old[t]);
        const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
        group_term += std::min(ratio * advantage, clipped * advantage);
      }
    }
    loss_sum += -group_term / static_cast<double>(group_size);
  }
  return loss_sum / static_cast<double>(group_ids.size());
}

ToyPolicy::ToyPolicy(std::vector<double> params) : params_(std::move(params)) {
  if (params_.empty()) throw std::invalid_argument("ToyPolicy: empty parameter vector");
}

std::vector<double> ToyPolicy::log_probs() const {
  const double max_logit = *std::max_element(params_.begin(), params_.end());
  double z = 0.0;
  for (double p : params_) z += std::exp(p - max_logit);
  const double log_z = max_logit + std::log(z);
  std::vector<double> out;
  out.reserve(params_.size());
  for (double p : params_) out.push_back(p - log_z);
  return out;
}

void ToyPolicy::fill_logp_new(TokenBatch& batch) const {
  const auto logp = log_probs();
  for (TokenSeq& seq : batch.seqs) {
    seq.logp_new.resize(seq.tokens.size());
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      seq.logp_new[i] = logp.at(static_cast<std::size_t>(seq.tokens[i]));
    }
  }
}

std::vector<double> ToyPolicy::masked_nll_grad(const TokenBatch& batch) const {
  const auto logp = log_probs();
  std::vector<double> probs;
  probs.reserve(logp.size());
  for (double lp : logp) probs.push_back(std::exp(lp));

  // d(-log pi(x)) / d theta_v = pi_v - [v == x]
  std::vector<double> grad(params_.size(), 0.0);
  for (const TokenSeq& seq : batch.seqs) {
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      if (i >= seq.mask.size() || !seq.mask[i]) continue;
      for (std::size_t v = 0; v < grad.size(); ++v) grad[v] += probs[v];
      grad[static_cast<std::size_t>(seq.tokens[i])] -= 1.0;
    }
  }
  for (double& g : grad) g /= static_cast<double>(batch.seqs.size());
  return grad;
}

std::vector<double> ToyPolicy::grpo_grad(const TokenBatch& batch,
                                         const std::vector<double>& advantages,
                                         double clip_eps) const {
  if (batch.seqs.size() != advantages.size()) {
    throw std::invalid_argument("grpo_grad: advantages must align with sequences");
  }
  const auto logp = log_probs();
  std::vector<double> probs;
  probs.reserve(logp.size());
  for (double lp : logp) probs.push_back(std::exp(lp));

  std::vector<int> group_ids;
  std::vector<int> group_sizes;
  for (const TokenSeq& seq : batch.seqs) {
    auto it = std::find(group_ids.begin(), group_ids.end(), seq.group);
    if (it == group_ids.end()) {
      group_ids.push_back(seq.group);
      group_sizes.push_back(0);
      it = group_ids.end() - 1;
    }
    ++group_sizes[static_cast<std::size_t>(it - group_ids.begin())];
  }

  std::vector<double> grad(params_.size(), 0.0);
  for (std::size_t i = 0; i < batch.seqs.size(); ++i) {
    const TokenSeq& seq = batch.seqs[i];
    const std::size_t g =
        static_cast<std::size_t>(std::find(group_ids.begin(), group_ids.end(), seq.group) -
                                 group_ids.begin());
    const double scale = 1.0 / (static_cast<double>(group_sizes[g]) *
                                static_cast<double>(group_ids.size()));
    const double advantage = advantages[i];
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
      if (t >= seq.mask.size() || !seq.mask[t]) continue;
      const std::size_t tok = static_cast<std::size_t>(seq.tokens[t]);
      const double ratio = std::exp(logp[tok] - seq.logp_old[t]);
      const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
      // min() picks the unclipped branch iff ratio*A <= clipped*A; only that
      // branch depends on theta.
      if (ratio * advantage > clipped * advantage) continue;
      // d(rho*A)/d theta_v = rho*A*([v==x] - pi_v); the loss negates it.
      const double coeff = scale * advantage * ratio;
      for (std::size_t v = 0; v < grad.size(); ++v) grad[v] += coeff * probs[v];
      grad[tok] -= coeff;
    }
  }
  return grad;
}

}  // namespace docnav

#include "docnav/rewards.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace docnav {

std::string normalize_answer(const std::string& s) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : s) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

namespace {

// Two-row iterative edit distance.
int levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return static_cast<int>(m);
  if (m == 0) return static_cast<int>(n);
  std::vector<int> prev(m + 1), curr(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace

double nls(const std::string& a, const std::string& b) {
  const std::string na = normalize_answer(a), nb = normalize_answer(b);
  if (na.empty() && nb.empty()) return 1.0;
  const auto longest = std::max(na.size(), nb.size());
  return 1.0 - static_cast<double>(levenshtein(na, nb)) / static_cast<double>(longest);
}

double answer_reward(const std::string& pred, const QAItem& qa, double tau) {
  switch (qa.answer_kind) {
    case AnswerKind::Freeform: {
      double best = 0.0;
      for (const auto& gold : qa.gold_answers) best = std::max(best, nls(pred, gold));
      return best >= tau ? best : 0.0;
    }
    case AnswerKind::Identifier: {
      const std::string np = normalize_answer(pred);
      for (const auto& gold : qa.gold_answers) {
        if (np == normalize_answer(gold)) return 1.0;
      }
      return 0.0;
    }
    case AnswerKind::Unanswerable:
      return normalize_answer(pred) == kNotAnswerable ? 1.0 : 0.0;
  }
  return 0.0;
}

double evidence_reward(const std::set<int>& p_rel, const std::set<int>& p_gt, double beta_sq,
                       double eps) {
  std::size_t inter = 0;
  for (int p : p_rel) inter += p_gt.count(p);
  if (inter == 0) return 0.0;
  const double p = static_cast<double>(inter) / std::max(static_cast<double>(p_rel.size()), eps);
  const double r = static_cast<double>(inter) / std::max(static_cast<double>(p_gt.size()), eps);
  return (1.0 + beta_sq) * p * r / std::max(beta_sq * p + r, eps);
}

double format_reward(const Trajectory& traj) { return validate_trajectory(traj).valid ? 1.0 : 0.0; }

RewardBreakdown total_reward(const Trajectory& traj, const QAItem& qa, const RewardWeights& weights,
                             double tau) {
  RewardBreakdown breakdown;
  if (traj.final_answer) breakdown.r_ans = answer_reward(*traj.final_answer, qa, tau);
  breakdown.r_evi = evidence_reward(relevant_pages_union(traj), qa.evidence_pages);
  breakdown.r_fmt = format_reward(traj);
  breakdown.total =
      weights.ans * breakdown.r_ans + weights.evi * breakdown.r_evi + weights.fmt * breakdown.r_fmt;
  return breakdown;
}

}  // namespace docnav

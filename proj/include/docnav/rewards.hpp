#pragma once

#include <set>
#include <string>

#include "docnav/corpus.hpp"
#include "docnav/protocol.hpp"

namespace docnav {

struct RewardWeights {
  double ans = 0.6;
  double evi = 0.3;
  double fmt = 0.1;
};

struct RewardBreakdown {
  double r_ans = 0.0;
  double r_evi = 0.0;
  double r_fmt = 0.0;
  double total = 0.0;
};

// ANLS normalization: lowercase, trim, collapse inner whitespace runs.
std::string normalize_answer(const std::string& s);

// Normalized Levenshtein similarity over normalized strings:
// 1 - lev(a', b') / max(|a'|, |b'|); 1 when both normalize to empty.
double nls(const std::string& a, const std::string& b);

// Freeform: thresholded ANLS against the best gold (0 strictly below tau).
// Identifier: normalized exact match against any gold. Unanswerable: exact
// "not answerable" after normalization.
double answer_reward(const std::string& pred, const QAItem& qa, double tau = 0.5);

// Recall-weighted F-score with beta^2 = 2. Zero when the intersection is
// empty (which also covers P_gt = {} for unanswerable items); epsilon only
// guards the divisions and never perturbs non-degenerate values.
double evidence_reward(const std::set<int>& p_rel, const std::set<int>& p_gt, double beta_sq = 2.0,
                       double eps = 1e-8);

// 1 iff the trajectory is structurally valid (parseable turns, valid
// arguments, answer terminal, budget respected).
double format_reward(const Trajectory& traj);

// P_rel is the union of <relevant_pages> across turns; a missing final
// answer (budget exhaustion or abort) scores 0 on the answer component.
RewardBreakdown total_reward(const Trajectory& traj, const QAItem& qa,
                             const RewardWeights& weights = {}, double tau = 0.5);

}  // namespace docnav

#pragma once

#include <map>
#include <string>
#include <vector>

#include "docnav/corpus.hpp"
#include "docnav/environment.hpp"
#include "docnav/protocol.hpp"
#include "docnav/rewards.hpp"

namespace docnav {

struct PageF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Harmonic-mean F1 (beta = 1) with the 0/0 -> 0 convention; distinct from the
// recall-weighted reward.
PageF1 page_f1(const std::set<int>& pred, const std::set<int>& gt);

struct EpisodeRecord {
  Trajectory trajectory;
  QAItem qa;
  RewardBreakdown reward;
  // Delivered page -> "retrieval" | "fetch"; covers exactly the delivered
  // pages (visited-set soundness makes the tag unique).
  std::map<int, std::string> provenance;
  long long overview_tokens = 0;
  long long page_tokens = 0;  // delivered full-resolution pages

  long long total_tokens() const { return overview_tokens + page_tokens; }
};

EpisodeRecord make_episode_record(const Trajectory& traj, const Corpus& corpus,
                                  const EnvConfig& config = {}, const RewardWeights& weights = {},
                                  double tau = 0.5);

// Percentages in [0, 100]. Ratio is over all episodes; precision/recall/f1
// are averaged per episode over the episodes that invoke the tool and carry
// gold evidence (unanswerable items have no page-level truth to score).
struct ToolStats {
  double ratio = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

std::map<std::string, ToolStats> tool_usage_stats(const std::vector<EpisodeRecord>& records);

struct Report {
  int episodes = 0;
  double mean_answer_score = 0.0;
  double accuracy = 0.0;  // answer_reward > 0 rate
  PageF1 mean_page_f1;    // over items with gold evidence; prediction set is
                          // the same relevant_pages union the reward uses
  double avg_pages = 0.0;
  double avg_turns = 0.0;
  double avg_tokens = 0.0;
  std::map<std::string, ToolStats> tools;
};

Report aggregate(const std::vector<EpisodeRecord>& records);

std::string report_to_json(const Report& report,
                           const nlohmann::json& config = nlohmann::json::object());

// One line per episode: {"qa_id", "answer", "relevant_pages"} for external
// official scorers.
std::string prediction_to_jsonl(const EpisodeRecord& record);

}  // namespace docnav

#include "docnav/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "docnav/overview.hpp"

using nlohmann::json;

namespace docnav {

PageF1 page_f1(const std::set<int>& pred, const std::set<int>& gt) {
  std::size_t inter = 0;
  for (int p : pred) inter += gt.count(p);
  PageF1 out;
  out.precision = pred.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(pred.size());
  out.recall = gt.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(gt.size());
  out.f1 = (out.precision + out.recall) == 0.0
               ? 0.0
               : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

EpisodeRecord make_episode_record(const Trajectory& traj, const Corpus& corpus,
                                  const EnvConfig& config, const RewardWeights& weights, double tau) {
  EpisodeRecord record;
  record.trajectory = traj;

  bool qa_found = false;
  for (const QAItem& qa : corpus.qa_items) {
    if (qa.qa_id == traj.qa_id) {
      record.qa = qa;
      qa_found = true;
      break;
    }
  }
  if (!qa_found) throw std::runtime_error("episode record: unknown qa_id " + traj.qa_id);

  const Document& doc = corpus.document(traj.doc_id);
  record.reward = total_reward(traj, record.qa, weights, tau);
  record.overview_tokens =
      overview_token_cost(doc.page_count(), config.group_capacity, config.header_height);
  for (const TrajectoryTurn& rec : traj.turns) {
    const std::string tool =
        rec.parsed && std::holds_alternative<RetrievalAction>(rec.parsed->action) ? "retrieval"
                                                                                  : "fetch";
    for (int page : rec.feedback.pages) {
      record.provenance[page] = tool;
      record.page_tokens += doc.page(page).token_cost();
    }
  }
  return record;
}

std::map<std::string, ToolStats> tool_usage_stats(const std::vector<EpisodeRecord>& records) {
  std::map<std::string, ToolStats> stats = {{"retrieval", {}}, {"fetch", {}}};
  for (const auto& tool : {std::string("retrieval"), std::string("fetch")}) {
    int invoked = 0, scored = 0;
    double p_sum = 0, r_sum = 0, f_sum = 0;
    for (const EpisodeRecord& record : records) {
      bool uses_tool = false;
      std::set<int> delivered;
      for (const auto& [page, source] : record.provenance) {
        if (source == tool) delivered.insert(page);
      }
      for (const TrajectoryTurn& rec : record.trajectory.turns) {
        if (rec.parsed && action_type(rec.parsed->action) == tool) uses_tool = true;
      }
      if (!uses_tool) continue;
      ++invoked;
      if (record.qa.evidence_pages.empty()) continue;
      ++scored;
      const PageF1 f = page_f1(delivered, record.qa.evidence_pages);
      p_sum += f.precision;
      r_sum += f.recall;
      f_sum += f.f1;
    }
    ToolStats& out = stats[tool];
    out.ratio = records.empty() ? 0.0 : 100.0 * invoked / static_cast<double>(records.size());
    if (scored > 0) {
      out.precision = 100.0 * p_sum / scored;
      out.recall = 100.0 * r_sum / scored;
      out.f1 = 100.0 * f_sum / scored;
    }
  }
  return stats;
}

Report aggregate(const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no episode records");
  Report report;
  report.episodes = static_cast<int>(records.size());

  double ans_sum = 0, pages_sum = 0, turns_sum = 0, tokens_sum = 0;
  int correct = 0, evidence_items = 0;
  double p_sum = 0, r_sum = 0, f_sum = 0;
  for (const EpisodeRecord& record : records) {
    ans_sum += record.reward.r_ans;
    if (record.reward.r_ans > 0) ++correct;
    pages_sum += static_cast<double>(record.provenance.size());
    turns_sum += static_cast<double>(record.trajectory.turns.size());
    tokens_sum += static_cast<double>(record.total_tokens());
    if (!record.qa.evidence_pages.empty()) {
      ++evidence_items;
      const PageF1 f =
          page_f1(relevant_pages_union(record.trajectory), record.qa.evidence_pages);
      p_sum += f.precision;
      r_sum += f.recall;
      f_sum += f.f1;
    }
  }
  const double n = static_cast<double>(records.size());
  report.mean_answer_score = ans_sum / n;
  report.accuracy = correct / n;
  report.avg_pages = pages_sum / n;
  report.avg_turns = turns_sum / n;
  report.avg_tokens = tokens_sum / n;
  if (evidence_items > 0) {
    report.mean_page_f1.precision = p_sum / evidence_items;
    report.mean_page_f1.recall = r_sum / evidence_items;
    report.mean_page_f1.f1 = f_sum / evidence_items;
  }
  report.tools = tool_usage_stats(records);
  return report;
}

std::string report_to_json(const Report& report, const json& config) {
  json j;
  j["episodes"] = report.episodes;
  j["mean_answer_score"] = report.mean_answer_score;
  j["accuracy"] = report.accuracy;
  j["page_f1"] = {{"precision", report.mean_page_f1.precision},
                  {"recall", report.mean_page_f1.recall},
                  {"f1", report.mean_page_f1.f1}};
  j["avg_pages"] = report.avg_pages;
  j["avg_turns"] = report.avg_turns;
  j["avg_tokens"] = report.avg_tokens;
  for (const auto& [tool, stats] : report.tools) {
    j["tools"][tool] = {{"ratio", stats.ratio},
                        {"recall", stats.recall},
                        {"precision", stats.precision},
                        {"f1", stats.f1}};
  }
  if (!config.empty()) j["config"] = config;
  return j.dump(2) + "\n";
}

std::string prediction_to_jsonl(const EpisodeRecord& record) {
  json j;
  j["qa_id"] = record.trajectory.qa_id;
  j["answer"] = record.trajectory.final_answer ? json(*record.trajectory.final_answer) : json();
  const auto rel = relevant_pages_union(record.trajectory);
  j["relevant_pages"] = std::vector<int>(rel.begin(), rel.end());
  return j.dump();
}

}  // namespace docnav

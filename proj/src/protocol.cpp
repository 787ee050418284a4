#include "docnav/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

using nlohmann::json;

namespace docnav {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

bool all_space(const std::string& s, std::size_t from, std::size_t to) {
  for (std::size_t i = from; i < to; ++i) {
    if (!is_space(s[i])) return false;
  }
  return true;
}

std::vector<std::size_t> find_all(const std::string& haystack, const std::string& needle) {
  std::vector<std::size_t> out;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    out.push_back(pos);
  }
  return out;
}

// Bracketed comma-separated positive integers: "[3, 4]". Duplicates are
// dropped, first occurrence wins.
std::optional<std::vector<int>> parse_index_list(const std::string& text, bool allow_empty) {
  const std::string body = trim(text);
  if (body.size() < 2 || body.front() != '[' || body.back() != ']') return std::nullopt;
  std::vector<int> out;
  std::set<int> seen;
  std::size_t i = 1;
  const std::size_t end = body.size() - 1;
  while (true) {
    while (i < end && is_space(body[i])) ++i;
    if (i == end) break;
    std::size_t start = i;
    while (i < end && std::isdigit(static_cast<unsigned char>(body[i]))) ++i;
    if (i == start) return std::nullopt;
    long value = 0;
    try {
      value = std::stol(body.substr(start, i - start));
    } catch (const std::exception&) {
      return std::nullopt;
    }
    if (value < 1 || value > 1'000'000) return std::nullopt;
    if (seen.insert(static_cast<int>(value)).second) out.push_back(static_cast<int>(value));
    while (i < end && is_space(body[i])) ++i;
    if (i == end) break;
    if (body[i] != ',') return std::nullopt;
    ++i;
    // trailing comma before ']' is malformed
    std::size_t j = i;
    while (j < end && is_space(body[j])) ++j;
    if (j == end) return std::nullopt;
  }
  if (out.empty() && !allow_empty) return std::nullopt;
  return out;
}

struct SubBlock {
  bool present = false;
  std::string content;
};

const char* kThinkTags[] = {"analysis", "plan", "relevant_pages", "summary"};

// Extracts a named sub-block from the think body. Close tag optional; without
// it, content runs to the next known open tag or the end of the body.
std::optional<std::string> extract_sub_block(const std::string& body, const std::string& tag,
                                             std::string* error) {
  const std::string open = "<" + tag + ">";
  const auto occurrences = find_all(body, open);
  if (occurrences.empty()) return std::nullopt;
  if (occurrences.size() > 1) {
    *error = "duplicate <" + tag + "> in <think>";
    return std::nullopt;
  }
  const std::size_t content_start = occurrences[0] + open.size();
  const std::string close = "</" + tag + ">";
  std::size_t content_end = body.find(close, content_start);
  if (content_end == std::string::npos) {
    content_end = body.size();
    for (const char* other : kThinkTags) {
      const std::size_t p = body.find("<" + std::string(other) + ">", content_start);
      if (p != std::string::npos) content_end = std::min(content_end, p);
    }
  }
  return trim(body.substr(content_start, content_end - content_start));
}

std::optional<Action> parse_action_body(const std::string& body, std::string* error) {
  std::size_t i = 0;
  while (i < body.size() && is_space(body[i])) ++i;
  const std::string rest = body.substr(i);

  auto tag_content = [&](const std::string& tag) -> std::optional<std::string> {
    const std::string open = "<" + tag + ">";
    if (rest.rfind(open, 0) != 0) return std::nullopt;
    std::string content = rest.substr(open.size());
    const std::string close = "</" + tag + ">";
    const std::size_t close_pos = content.find(close);
    if (close_pos != std::string::npos) {
      if (!all_space(content, close_pos + close.size(), content.size())) {
        *error = "trailing content after </" + tag + ">";
        return std::nullopt;
      }
      content = content.substr(0, close_pos);
    }
    return content;
  };

  if (auto q = tag_content("retrieval_page")) return Action{RetrievalAction{trim(*q)}};
  if (!error->empty()) return std::nullopt;
  if (auto lst = tag_content("fetch_page")) {
    auto indices = parse_index_list(*lst, /*allow_empty=*/false);
    if (!indices) {
      *error = "bad fetch_page index list";
      return std::nullopt;
    }
    return Action{FetchAction{*indices}};
  }
  if (!error->empty()) return std::nullopt;
  if (auto text = tag_content("answer")) return Action{AnswerAction{trim(*text)}};
  if (!error->empty()) return std::nullopt;

  *error = "unknown action tag (expected <retrieval_page>, <fetch_page> or <answer>)";
  return std::nullopt;
}

std::string render_index_list(const std::vector<int>& indices) {
  std::string out = "[";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(indices[i]);
  }
  out += "]";
  return out;
}

json action_to_json(const Action& action) {
  json j;
  j["type"] = action_type(action);
  if (const auto* r = std::get_if<RetrievalAction>(&action)) {
    j["query"] = r->query;
  } else if (const auto* f = std::get_if<FetchAction>(&action)) {
    j["indices"] = f->indices;
  } else if (const auto* a = std::get_if<AnswerAction>(&action)) {
    j["text"] = a->text;
  }
  return j;
}

}  // namespace

std::string action_type(const Action& action) {
  if (std::holds_alternative<RetrievalAction>(action)) return "retrieval";
  if (std::holds_alternative<FetchAction>(action)) return "fetch";
  return "answer";
}

ParsedTurn parse_turn(const std::string& raw, int turn_index) {
  const auto think_opens = find_all(raw, "<think>");
  const auto think_closes = find_all(raw, "</think>");
  const auto action_opens = find_all(raw, "<action>");
  const auto action_closes = find_all(raw, "</action>");

  if (think_opens.empty()) return FormatError{"missing <think> block"};
  if (think_opens.size() > 1 || think_closes.size() > 1) return FormatError{"exactly one think block required"};
  if (think_closes.empty()) return FormatError{"unclosed <think> block"};
  if (action_opens.empty()) return FormatError{"missing <action> block"};
  if (action_opens.size() > 1 || action_closes.size() > 1) return FormatError{"exactly one action block required"};
  if (action_closes.empty()) return FormatError{"unclosed <action> block"};

  const std::size_t think_open = think_opens[0], think_close = think_closes[0];
  const std::size_t action_open = action_opens[0], action_close = action_closes[0];
  if (think_close < think_open || action_close < action_open) {
    return FormatError{"malformed block nesting"};
  }
  if (!(think_close < action_open)) return FormatError{"<think> must precede <action>"};
  if (!all_space(raw, 0, think_open) ||
      !all_space(raw, think_close + 8, action_open) ||
      !all_space(raw, action_close + 9, raw.size())) {
    return FormatError{"content outside <think>/<action> blocks"};
  }

  const std::string think_body = raw.substr(think_open + 7, think_close - (think_open + 7));
  const std::string action_body = raw.substr(action_open + 8, action_close - (action_open + 8));

  std::string sub_error;
  const auto analysis = extract_sub_block(think_body, "analysis", &sub_error);
  if (!sub_error.empty()) return FormatError{sub_error};
  const auto plan = extract_sub_block(think_body, "plan", &sub_error);
  if (!sub_error.empty()) return FormatError{sub_error};
  const auto relevant = extract_sub_block(think_body, "relevant_pages", &sub_error);
  if (!sub_error.empty()) return FormatError{sub_error};
  const auto summary = extract_sub_block(think_body, "summary", &sub_error);
  if (!sub_error.empty()) return FormatError{sub_error};

  if (!analysis) return FormatError{"missing <analysis> in <think>"};
  if (!summary) return FormatError{"missing <summary> in <think>"};
  if (turn_index == 0) {
    if (!plan) return FormatError{"missing <plan> (required on the first turn)"};
    if (relevant) return FormatError{"unexpected <relevant_pages> on the first turn"};
  } else {
    if (plan) return FormatError{"unexpected <plan> after the first turn"};
    if (!relevant) return FormatError{"missing <relevant_pages> (required after the first turn)"};
  }

  Turn turn;
  turn.turn_index = turn_index;
  turn.think.analysis = *analysis;
  turn.think.summary = *summary;
  if (turn_index == 0) {
    turn.think.plan = *plan;
  } else {
    auto pages = parse_index_list(*relevant, /*allow_empty=*/true);
    if (!pages) return FormatError{"bad relevant_pages index list"};
    turn.think.relevant_pages = *pages;
  }

  std::string action_error;
  auto action = parse_action_body(action_body, &action_error);
  if (!action) return FormatError{action_error};
  turn.action = *action;
  turn.raw = raw;
  return turn;
}

std::string render_turn(const Turn& turn) {
  std::string out = "<think><analysis>" + turn.think.analysis + "</analysis>";
  if (turn.turn_index == 0) {
    out += "<plan>" + turn.think.plan.value_or("") + "</plan>";
  } else {
    out += "<relevant_pages>" +
           render_index_list(turn.think.relevant_pages.value_or(std::vector<int>{})) +
           "</relevant_pages>";
  }
  out += "<summary>" + turn.think.summary + "</summary></think><action>";
  if (const auto* r = std::get_if<RetrievalAction>(&turn.action)) {
    out += "<retrieval_page>" + r->query;
  } else if (const auto* f = std::get_if<FetchAction>(&turn.action)) {
    out += "<fetch_page>" + render_index_list(f->indices);
  } else {
    out += "<answer>" + std::get<AnswerAction>(turn.action).text;
  }
  out += "</action>";
  return out;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Answer: return "answer";
    case Termination::Budget: return "budget";
    case Termination::Aborted: return "aborted";
  }
  return "budget";
}

Termination termination_from_string(const std::string& s) {
  if (s == "answer") return Termination::Answer;
  if (s == "budget") return Termination::Budget;
  if (s == "aborted") return Termination::Aborted;
  throw std::invalid_argument("unknown termination: " + s);
}

FormatReport validate_trajectory(const Trajectory& traj) {
  FormatReport report;
  auto flag = [&](const std::string& msg) {
    report.valid = false;
    report.violations.push_back(msg);
  };

  if (static_cast<int>(traj.turns.size()) > traj.budget) {
    flag("budget violation: " + std::to_string(traj.turns.size()) + " turns > budget " +
         std::to_string(traj.budget));
  }
  for (std::size_t i = 0; i < traj.turns.size(); ++i) {
    const TrajectoryTurn& rec = traj.turns[i];
    if (rec.t != static_cast<int>(i)) {
      flag("turn indices not consecutive at position " + std::to_string(i));
    }
    const ParsedTurn parsed = parse_turn(rec.raw, rec.t);
    if (const auto* err = std::get_if<FormatError>(&parsed)) {
      flag("turn " + std::to_string(rec.t) + ": " + err->rule);
      continue;
    }
    const Turn& turn = std::get<Turn>(parsed);
    if (std::holds_alternative<AnswerAction>(turn.action) && i + 1 != traj.turns.size()) {
      flag("turn " + std::to_string(rec.t) + ": action after answer");
    }
  }
  return report;
}

std::set<int> relevant_pages_union(const Trajectory& traj) {
  std::set<int> out;
  for (const TrajectoryTurn& rec : traj.turns) {
    if (rec.parsed && rec.parsed->think.relevant_pages) {
      out.insert(rec.parsed->think.relevant_pages->begin(), rec.parsed->think.relevant_pages->end());
    }
  }
  return out;
}

std::string trajectory_to_jsonl(const Trajectory& traj, const json& extra) {
  json j;
  j["qa_id"] = traj.qa_id;
  j["doc_id"] = traj.doc_id;
  j["budget"] = traj.budget;
  j["turns"] = json::array();
  for (const TrajectoryTurn& rec : traj.turns) {
    json t;
    t["t"] = rec.t;
    t["raw"] = rec.raw;
    if (rec.parsed) {
      t["action"] = action_to_json(rec.parsed->action);
      if (rec.parsed->think.relevant_pages) {
        t["relevant_pages"] = *rec.parsed->think.relevant_pages;
      } else {
        t["relevant_pages"] = nullptr;
      }
      t["summary"] = rec.parsed->think.summary;
    } else {
      t["action"] = {{"type", "invalid"}, {"error", rec.parse_error.value_or("unparsed")}};
      t["relevant_pages"] = nullptr;
      t["summary"] = nullptr;
    }
    json fb;
    fb["pages"] = rec.feedback.pages;
    fb["reminders"] = rec.feedback.reminders;
    if (rec.feedback.format_notice) fb["format_notice"] = *rec.feedback.format_notice;
    t["feedback"] = std::move(fb);
    j["turns"].push_back(std::move(t));
  }
  if (traj.final_answer) {
    j["final_answer"] = *traj.final_answer;
  } else {
    j["final_answer"] = nullptr;
  }
  j["terminated_by"] = to_string(traj.terminated_by);
  if (traj.transport_error) j["transport_error"] = *traj.transport_error;
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j.dump();
}

Trajectory trajectory_from_jsonl(const std::string& line, json* extra) {
  const json j = json::parse(line);
  Trajectory traj;
  traj.qa_id = j.at("qa_id").get<std::string>();
  traj.doc_id = j.at("doc_id").get<std::string>();
  traj.budget = j.value("budget", 8);
  for (const json& t : j.at("turns")) {
    TrajectoryTurn rec;
    rec.t = t.at("t").get<int>();
    rec.raw = t.at("raw").get<std::string>();
    // Raw is authoritative; structured fields are re-derived.
    const ParsedTurn parsed = parse_turn(rec.raw, rec.t);
    if (const auto* turn = std::get_if<Turn>(&parsed)) {
      rec.parsed = *turn;
    } else {
      rec.parse_error = std::get<FormatError>(parsed).rule;
    }
    if (t.contains("feedback")) {
      const json& fb = t.at("feedback");
      rec.feedback.pages = fb.value("pages", std::vector<int>{});
      rec.feedback.reminders = fb.value("reminders", std::vector<std::string>{});
      if (fb.contains("format_notice") && !fb.at("format_notice").is_null()) {
        rec.feedback.format_notice = fb.at("format_notice").get<std::string>();
      }
    }
    traj.turns.push_back(std::move(rec));
  }
  if (j.contains("final_answer") && !j.at("final_answer").is_null()) {
    traj.final_answer = j.at("final_answer").get<std::string>();
  }
  traj.terminated_by = termination_from_string(j.value("terminated_by", "budget"));
  if (j.contains("transport_error") && !j.at("transport_error").is_null()) {
    traj.transport_error = j.at("transport_error").get<std::string>();
  }
  if (extra) {
    *extra = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) {
      static const std::set<std::string> core = {"qa_id",        "doc_id",       "budget",
                                                 "turns",        "final_answer", "terminated_by",
                                                 "transport_error"};
      if (!core.count(it.key())) (*extra)[it.key()] = it.value();
    }
  }
  return traj;
}

}  // namespace docnav

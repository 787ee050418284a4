#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace docnav {

// One atomic action per turn.
struct RetrievalAction {
  std::string query;
  bool operator==(const RetrievalAction&) const = default;
};
struct FetchAction {
  std::vector<int> indices;  // deduplicated, first-occurrence order
  bool operator==(const FetchAction&) const = default;
};
struct AnswerAction {
  std::string text;
  bool operator==(const AnswerAction&) const = default;
};
using Action = std::variant<RetrievalAction, FetchAction, AnswerAction>;

std::string action_type(const Action& action);  // "retrieval" | "fetch" | "answer"

struct ThinkBlock {
  std::string analysis;
  std::optional<std::string> plan;                 // first turn only
  std::optional<std::vector<int>> relevant_pages;  // later turns only
  std::string summary;
  bool operator==(const ThinkBlock&) const = default;
};

struct Turn {
  int turn_index = 0;
  ThinkBlock think;
  Action action;
  std::string raw;  // original text; re-parses to the same fields

  // Semantic equality; raw is provenance, not identity.
  bool operator==(const Turn& o) const {
    return turn_index == o.turn_index && think == o.think && action == o.action;
  }
};

struct FormatError {
  std::string rule;  // first violated rule
};

using ParsedTurn = std::variant<Turn, FormatError>;

// Total parser for `<think>...</think><action>...</action>`. Never throws on
// malformed input; every string maps to a Turn or a FormatError. Sub-block
// close tags are optional on read (content then runs to the next known tag),
// unknown tags inside <think> are ignored; rendering is strict.
ParsedTurn parse_turn(const std::string& raw, int turn_index);

// Canonical serialization; parse_turn(render_turn(t), t.turn_index) == t.
std::string render_turn(const Turn& turn);

// Environment response attached to each consumed turn.
struct TurnFeedback {
  std::vector<int> pages;  // delivered page indices, delivery order
  std::vector<std::string> reminders;
  std::optional<std::string> format_notice;
  bool operator==(const TurnFeedback&) const = default;
};

struct TrajectoryTurn {
  int t = 0;
  std::string raw;
  std::optional<Turn> parsed;  // absent when raw failed to parse
  std::optional<std::string> parse_error;
  TurnFeedback feedback;
};

enum class Termination { Answer, Budget, Aborted };
std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct Trajectory {
  std::string qa_id;
  std::string doc_id;
  int budget = 8;  // T
  std::vector<TrajectoryTurn> turns;
  std::optional<std::string> final_answer;
  Termination terminated_by = Termination::Budget;
  std::optional<std::string> transport_error;  // bridge failures only
};

struct FormatReport {
  bool valid = true;
  std::vector<std::string> violations;
};

// Structural validity: every turn re-parses at its index, indices are
// consecutive from 0, an answer action only terminates, and the turn count
// respects the recorded budget.
FormatReport validate_trajectory(const Trajectory& traj);

// Union of <relevant_pages> across all turns. Shared by reward and metric
// computations so both see the same prediction set.
std::set<int> relevant_pages_union(const Trajectory& traj);

// JSONL (one episode per line). `extra` is merged into the top-level object;
// callers use it for reward/config annotations.
std::string trajectory_to_jsonl(const Trajectory& traj,
                                const nlohmann::json& extra = nlohmann::json::object());
Trajectory trajectory_from_jsonl(const std::string& line, nlohmann::json* extra = nullptr);

}  // namespace docnav

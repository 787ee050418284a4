#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "docnav/corpus.hpp"
#include "docnav/overview.hpp"
#include "docnav/protocol.hpp"
#include "docnav/retrieval.hpp"

namespace docnav {

struct EnvConfig {
  int max_turns = 8;                           // T
  int group_capacity = kDefaultGroupCapacity;  // G
  int header_height = kDefaultHeaderHeight;    // h
  std::string page_label_template = "Page {}:";
};

// Retrieval budget: k = min(ceil(N/10), 4).
int adaptive_k(int page_count);

struct DeliveredPage {
  int index = 0;
  std::string label;          // "Page i:"
  const Page* page = nullptr; // borrowed from the corpus document
};

struct Feedback {
  std::vector<DeliveredPage> pages;
  std::vector<std::string> reminders;
  std::optional<std::string> format_notice;
};

struct InitialObservation {
  std::string qa_id;
  std::string question;
  int budget = 0;
  OverviewSet overview;
};

struct AugmentedObservation {
  Feedback feedback;
  std::string working_memory;
};

using Observation = std::variant<InitialObservation, AugmentedObservation>;

enum class Outcome { Pending, Answered, NoAnswer };

struct EnvState {
  std::set<int> visited;
  std::vector<std::string> memory;  // one entry per consumed turn
  int turn = 0;
  bool done = false;
  Outcome outcome = Outcome::Pending;
  std::string answer;          // set when outcome == Answered
  bool format_invalid = false; // any turn failed to parse
};

// Concatenated per-turn summaries, newline-joined; empty before any turn.
std::string working_memory(const EnvState& state);

struct StepResult {
  Feedback feedback;
  bool done = false;
};

// One episode over one document. Single-threaded; the shared corpus and the
// retriever index stay immutable, so episodes can run concurrently.
class Environment {
 public:
  Environment(const Document& doc, const QAItem& qa, PageRetriever& retriever, EnvConfig config = {});

  // Clears all episode state and returns the initial observation (question +
  // thumbnail overview).
  Observation reset();

  // Consumes one agent turn. Delivery rules: a fresh in-range page is
  // delivered once and marked visited; repeats and out-of-range indices get
  // a text reminder and no image. Stepping a finished episode is a usage
  // error.
  StepResult step(const ParsedTurn& turn);

  const EnvState& state() const { return state_; }
  const Document& doc() const { return doc_; }
  const EnvConfig& config() const { return config_; }

 private:
  std::string page_label(int index) const;

  const Document& doc_;
  const QAItem& qa_;
  PageRetriever& retriever_;
  EnvConfig config_;
  EnvState state_;
};

class AgentPolicy;  // agents.hpp

// Drives reset/step until the episode finishes; returns the full trajectory
// with per-turn feedback. Agent transport failures abort the episode and are
// recorded on the trajectory instead of propagating.
Trajectory run_episode(const Document& doc, const QAItem& qa, AgentPolicy& agent,
                       PageRetriever& retriever, const EnvConfig& config = {});

}  // namespace docnav

#include "docnav/environment.hpp"

#include <stdexcept>

#include "docnav/agents.hpp"

namespace docnav {

int adaptive_k(int page_count) {
  if (page_count < 1) throw std::invalid_argument("adaptive_k: page_count must be >= 1");
  return std::min((page_count + 9) / 10, 4);
}

std::string working_memory(const EnvState& state) {
  std::string out;
  for (std::size_t i = 0; i < state.memory.size(); ++i) {
    if (i) out += '\n';
    out += state.memory[i];
  }
  return out;
}

Environment::Environment(const Document& doc, const QAItem& qa, PageRetriever& retriever,
                         EnvConfig config)
    : doc_(doc), qa_(qa), retriever_(retriever), config_(std::move(config)) {
  if (config_.max_turns < 1) throw std::invalid_argument("EnvConfig: max_turns must be >= 1");
}

std::string Environment::page_label(int index) const {
  std::string label = config_.page_label_template;
  const auto pos = label.find("{}");
  if (pos != std::string::npos) label.replace(pos, 2, std::to_string(index));
  return label;
}

Observation Environment::reset() {
  state_ = EnvState{};
  InitialObservation obs;
  obs.qa_id = qa_.qa_id;
  obs.question = qa_.question;
  obs.budget = config_.max_turns;
  obs.overview = build_overview(doc_, config_.group_capacity, config_.header_height);
  return obs;
}

StepResult Environment::step(const ParsedTurn& parsed) {
  if (state_.done) throw std::logic_error("Environment::step: episode already finished");

  Feedback feedback;
  std::vector<int> requested;
  bool answered = false;

  if (const auto* err = std::get_if<FormatError>(&parsed)) {
    state_.memory.emplace_back();  // keep |memory| aligned with the turn count
    state_.format_invalid = true;
    feedback.format_notice = "Invalid turn format: " + err->rule +
                             ". Reply with <think>...</think><action>...</action> and exactly one action.";
  } else {
    const Turn& turn = std::get<Turn>(parsed);
    state_.memory.push_back(turn.think.summary);
    if (const auto* answer = std::get_if<AnswerAction>(&turn.action)) {
      answered = true;
      state_.answer = answer->text;
    } else if (const auto* retrieval = std::get_if<RetrievalAction>(&turn.action)) {
      const auto ranked =
          retriever_.retrieve(retrieval->query, state_.visited, adaptive_k(doc_.page_count()));
      for (const auto& r : ranked) requested.push_back(r.index);
    } else {
      requested = std::get<FetchAction>(turn.action).indices;
    }
  }

  // Feedback construction: the same delivery loop serves both actions, so
  // visited-set soundness holds regardless of what the retriever returned.
  for (int index : requested) {
    if (index < 1 || index > doc_.page_count()) {
      feedback.reminders.push_back("Page " + std::to_string(index) + " does not exist.");
    } else if (state_.visited.count(index)) {
      feedback.reminders.push_back("Page " + std::to_string(index) + " already visited.");
    } else {
      state_.visited.insert(index);
      feedback.pages.push_back({index, page_label(index), &doc_.page(index)});
    }
  }

  ++state_.turn;
  if (answered) {
    state_.done = true;
    state_.outcome = Outcome::Answered;
  } else if (state_.turn >= config_.max_turns) {
    state_.done = true;
    state_.outcome = Outcome::NoAnswer;
  }
  return {std::move(feedback), state_.done};
}

Trajectory run_episode(const Document& doc, const QAItem& qa, AgentPolicy& agent,
                       PageRetriever& retriever, const EnvConfig& config) {
  Environment env(doc, qa, retriever, config);
  Trajectory traj;
  traj.qa_id = qa.qa_id;
  traj.doc_id = qa.doc_id;
  traj.budget = config.max_turns;

  Observation obs = env.reset();
  for (int t = 0; t < config.max_turns; ++t) {
    std::string raw;
    try {
      raw = agent.act(obs);
    } catch (const TransportError& e) {
      traj.transport_error = e.what();
      traj.terminated_by = Termination::Aborted;
      return traj;
    }

    TrajectoryTurn rec;
    rec.t = t;
    rec.raw = raw;
    const ParsedTurn parsed = parse_turn(raw, t);
    if (const auto* turn = std::get_if<Turn>(&parsed)) {
      rec.parsed = *turn;
    } else {
      rec.parse_error = std::get<FormatError>(parsed).rule;
    }

    const StepResult result = env.step(parsed);
    rec.feedback.reminders = result.feedback.reminders;
    rec.feedback.format_notice = result.feedback.format_notice;
    for (const auto& page : result.feedback.pages) rec.feedback.pages.push_back(page.index);
    traj.turns.push_back(std::move(rec));

    if (result.done) break;
    obs = AugmentedObservation{result.feedback, working_memory(env.state())};
  }

  if (env.state().outcome == Outcome::Answered) {
    traj.final_answer = env.state().answer;
    traj.terminated_by = Termination::Answer;
  } else {
    traj.terminated_by = Termination::Budget;
  }
  agent.on_done(traj.terminated_by == Termination::Answer ? "answered" : "no_answer");
  return traj;
}

}  // namespace docnav

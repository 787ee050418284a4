#include "docnav/agents.hpp"

#include <algorithm>
#include <cctype>

#include "docnav/retrieval.hpp"
#include "docnav/rng.hpp"

namespace docnav {
namespace {

constexpr int kOracleFetchChunk = 4;  // mirrors the retrieval budget cap

std::string render(int t, std::string analysis, std::optional<std::string> plan,
                   std::optional<std::vector<int>> relevant, std::string summary, Action action) {
  Turn turn;
  turn.turn_index = t;
  turn.think.analysis = std::move(analysis);
  turn.think.plan = std::move(plan);
  turn.think.relevant_pages = std::move(relevant);
  turn.think.summary = std::move(summary);
  turn.action = std::move(action);
  return render_turn(turn);
}

std::vector<int> delivered_indices(const Observation& obs) {
  std::vector<int> out;
  if (const auto* aug = std::get_if<AugmentedObservation>(&obs)) {
    for (const auto& page : aug->feedback.pages) out.push_back(page.index);
  }
  return out;
}

class OracleAgent final : public AgentPolicy {
 public:
  explicit OracleAgent(QAItem qa) : qa_(std::move(qa)) {
    pending_.assign(qa_.evidence_pages.begin(), qa_.evidence_pages.end());
  }

  std::string act(const Observation& obs) override {
    const int t = turn_++;
    if (qa_.answer_kind == AnswerKind::Unanswerable) {
      if (t == 0) {
        return render(0, "the thumbnails show no section related to the question",
                      "probe with one retrieval, then abstain if nothing relevant appears",
                      std::nullopt, "probing for evidence", RetrievalAction{qa_.question});
      }
      return render(t, "retrieved pages do not contain the requested information", std::nullopt,
                    std::vector<int>{}, "no supporting evidence found",
                    AnswerAction{kNotAnswerable});
    }

    std::optional<std::vector<int>> relevant;
    if (t > 0) {
      std::vector<int> rel;
      for (int index : delivered_indices(obs)) {
        if (qa_.evidence_pages.count(index)) rel.push_back(index);
      }
      relevant = std::move(rel);
    }
    if (!pending_.empty()) {
      const std::size_t n = std::min<std::size_t>(pending_.size(), kOracleFetchChunk);
      std::vector<int> chunk(pending_.begin(), pending_.begin() + static_cast<long>(n));
      pending_.erase(pending_.begin(), pending_.begin() + static_cast<long>(n));
      if (t == 0) {
        return render(0, "evidence pages are known for this question",
                      "fetch the evidence pages, then answer", std::nullopt,
                      "fetching evidence pages", FetchAction{std::move(chunk)});
      }
      return render(t, "more evidence pages remain", std::nullopt, std::move(relevant),
                    "fetching the remaining evidence pages", FetchAction{std::move(chunk)});
    }
    return render(t, "all evidence pages have been read", std::nullopt, std::move(relevant),
                  "evidence complete, answering", AnswerAction{qa_.gold_answers.front()});
  }

 private:
  QAItem qa_;
  std::vector<int> pending_;
  int turn_ = 0;
};

class GreedyRetrievalAgent final : public AgentPolicy {
 public:
  explicit GreedyRetrievalAgent(std::string question) : question_(std::move(question)) {}

  std::string act(const Observation& obs) override {
    const int t = turn_++;
    if (t == 0) {
      return render(0, "searching the document for the question terms",
                    "retrieve once, read the results, answer", std::nullopt,
                    "issued one retrieval", RetrievalAction{question_});
    }
    std::vector<int> delivered = delivered_indices(obs);
    std::vector<std::string> texts;
    if (const auto* aug = std::get_if<AugmentedObservation>(&obs)) {
      for (const auto& page : aug->feedback.pages) {
        texts.push_back(page.page && page.page->text ? *page.page->text : "");
      }
    }
    const auto answer = scan_pages_for_answer(question_, texts);
    return render(t, "scanned the retrieved pages for the requested fact", std::nullopt,
                  std::move(delivered), "answering from the retrieved pages",
                  AnswerAction{answer.value_or(kNotAnswerable)});
  }

 private:
  std::string question_;
  int turn_ = 0;
};

const std::vector<std::string> kRandomWords = {"total",  "figure", "table",  "revenue",
                                               "section", "chart",  "policy", "summary"};

class RandomAgent final : public AgentPolicy {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(seed) {}

  std::string act(const Observation& obs) override {
    const int t = turn_++;
    if (const auto* init = std::get_if<InitialObservation>(&obs)) {
      page_count_ = init->overview.page_count;
    }
    std::optional<std::string> plan;
    std::optional<std::vector<int>> relevant;
    if (t == 0) {
      plan = "explore at random";
    } else {
      std::vector<int> rel;
      for (int index : delivered_indices(obs)) {
        if (rng_.bernoulli(0.5)) rel.push_back(index);
      }
      relevant = std::move(rel);
    }

    Action action;
    const double roll = rng_.uniform_real();
    if (roll < 0.45) {
      std::string query = rng_.pick(kRandomWords);
      const int extra = static_cast<int>(rng_.uniform_int(0, 2));
      for (int i = 0; i < extra; ++i) query += " " + rng_.pick(kRandomWords);
      action = RetrievalAction{std::move(query)};
    } else if (roll < 0.9) {
      // Indices may repeat or run past N; the environment answers those with
      // reminders, which is exactly what the soundness suite wants to see.
      const int count = static_cast<int>(rng_.uniform_int(1, 3));
      std::vector<int> indices;
      for (int i = 0; i < count; ++i) {
        indices.push_back(static_cast<int>(rng_.uniform_int(1, std::max(1, page_count_ + 2))));
      }
      action = FetchAction{std::move(indices)};
    } else {
      action = rng_.bernoulli(0.5) ? Action{AnswerAction{rng_.pick(kRandomWords)}}
                                   : Action{AnswerAction{kNotAnswerable}};
    }
    return render(t, "random walk", std::move(plan), std::move(relevant), "step " + std::to_string(t),
                  std::move(action));
  }

 private:
  Rng rng_;
  int page_count_ = 1;
  int turn_ = 0;
};

bool is_fact_key(const std::string& token) {
  if (token.size() < 4) return false;
  bool has_alpha = false, has_digit = false;
  for (unsigned char c : token) {
    has_alpha |= std::isalpha(c) != 0;
    has_digit |= std::isdigit(c) != 0;
  }
  return has_alpha && has_digit;
}

std::optional<std::string> lookup_fact(const std::string& key,
                                       const std::vector<std::string>& page_texts) {
  const std::string prefix = key + ": ";
  for (const auto& text : page_texts) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      const std::string line = text.substr(start, end - start);
      if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
      if (end == text.size()) break;
      start = end + 1;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> scan_pages_for_answer(const std::string& question,
                                                 const std::vector<std::string>& page_texts) {
  for (const auto& token : tokenize(question)) {
    if (!is_fact_key(token)) continue;
    auto value = lookup_fact(token, page_texts);
    if (!value) continue;
    if (value->rfind("see ", 0) == 0) {
      value = lookup_fact(value->substr(4), page_texts);
      if (!value) return std::nullopt;  // dangling link; the target page was not delivered
    }
    return value;
  }
  return std::nullopt;
}

std::unique_ptr<AgentPolicy> oracle_agent(const QAItem& qa) { return std::make_unique<OracleAgent>(qa); }

std::unique_ptr<AgentPolicy> greedy_retrieval_agent(const std::string& question) {
  return std::make_unique<GreedyRetrievalAgent>(question);
}

std::unique_ptr<AgentPolicy> random_agent(std::uint64_t rng_seed) {
  return std::make_unique<RandomAgent>(rng_seed);
}

std::unique_ptr<AgentPolicy> OracleAgentFactory::make(const Document&, const QAItem& qa) {
  return oracle_agent(qa);
}

std::unique_ptr<AgentPolicy> GreedyAgentFactory::make(const Document&, const QAItem& qa) {
  return greedy_retrieval_agent(qa.question);
}

std::unique_ptr<AgentPolicy> RandomAgentFactory::make(const Document&, const QAItem& qa) {
  return random_agent(mix_seed(seed_, qa.qa_id));
}

}  // namespace docnav

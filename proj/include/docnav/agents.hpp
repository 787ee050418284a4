#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "docnav/environment.hpp"

namespace docnav {

// Raised by bridge-backed agents/retrievers on connection loss or timeout.
struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A policy maps observations to raw turn text; the environment judges
// validity. Implementations may keep per-episode state, one instance per
// episode.
class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual std::string act(const Observation& obs) = 0;
  virtual void on_done(const std::string& /*outcome*/) {}
};

// Test double with privileged access to the QA item: fetches the evidence
// pages directly (at most 4 per fetch), lists the delivered evidence as
// relevant, then answers with the first gold answer. Unanswerable items get
// one retrieval probe and then an explicit abstention.
std::unique_ptr<AgentPolicy> oracle_agent(const QAItem& qa);

// RAG-style baseline: one retrieval with the question verbatim, then an
// answer extracted from the delivered pages' text layers (abstains when the
// scan finds nothing). Never exceeds two turns.
std::unique_ptr<AgentPolicy> greedy_retrieval_agent(const std::string& question);

// Uniformly random format-valid actions; deterministic under the seed.
std::unique_ptr<AgentPolicy> random_agent(std::uint64_t rng_seed);

// Planted-fact scan used by the greedy baseline (and the corpus solvability
// check): keys are question tokens mixing letters and digits; a fact line is
// "key: value" and one "see <mid>" indirection may be followed across pages.
std::optional<std::string> scan_pages_for_answer(const std::string& question,
                                                 const std::vector<std::string>& page_texts);

// Builds one agent per episode.
class AgentFactory {
 public:
  virtual ~AgentFactory() = default;
  virtual std::unique_ptr<AgentPolicy> make(const Document& doc, const QAItem& qa) = 0;
};

class OracleAgentFactory final : public AgentFactory {
 public:
  std::unique_ptr<AgentPolicy> make(const Document& doc, const QAItem& qa) override;
};

class GreedyAgentFactory final : public AgentFactory {
 public:
  std::unique_ptr<AgentPolicy> make(const Document& doc, const QAItem& qa) override;
};

class RandomAgentFactory final : public AgentFactory {
 public:
  explicit RandomAgentFactory(std::uint64_t seed) : seed_(seed) {}
  std::unique_ptr<AgentPolicy> make(const Document& doc, const QAItem& qa) override;

 private:
  std::uint64_t seed_;
};

}  // namespace docnav

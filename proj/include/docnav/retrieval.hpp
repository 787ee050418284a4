#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "docnav/corpus.hpp"
#include "docnav/rng.hpp"

namespace docnav {

struct RankedPage {
  int index = 0;
  double score = 0.0;
  bool operator==(const RankedPage&) const = default;
};

// Lexical page index: lowercase tokens split on non-alphanumeric runs.
struct PageIndexStats {
  int page_count = 0;
  std::vector<std::map<std::string, int>> term_freqs;  // per page
  std::vector<int> page_lengths;
  std::map<std::string, int> doc_freqs;  // df over pages
  double avg_length = 0.0;
};

std::vector<std::string> tokenize(const std::string& text);
PageIndexStats build_index(const Document& doc);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Okapi BM25 with a non-negative idf:
//   score(q, p) = sum_t idf(t) * tf*(k1+1) / (tf + k1*(1 - b + b*len/avglen))
//   idf(t)      = ln(1 + (N - df + 0.5) / (df + 0.5))
double bm25_score(const PageIndexStats& index, const std::vector<std::string>& query_terms,
                  int page_index, const Bm25Params& params = {});

// Contract: at most k results, none excluded, scores non-increasing, ties
// broken by ascending page index. Fewer than k only when the unexcluded pool
// runs out. Implementations may keep per-episode state (one instance serves
// one episode).
class PageRetriever {
 public:
  virtual ~PageRetriever() = default;
  virtual std::vector<RankedPage> retrieve(const std::string& query, const std::set<int>& excluded,
                                           int k) = 0;
};

class Bm25Retriever final : public PageRetriever {
 public:
  Bm25Retriever(std::shared_ptr<const PageIndexStats> index, Bm25Params params = {});
  std::vector<RankedPage> retrieve(const std::string& query, const std::set<int>& excluded,
                                   int k) override;

 private:
  std::shared_ptr<const PageIndexStats> index_;
  Bm25Params params_;
};

// Test double: unvisited evidence pages first (score 1.0), then ascending
// non-evidence padding (score 0.0) up to k when padding is enabled.
class OracleRetriever final : public PageRetriever {
 public:
  OracleRetriever(const QAItem& qa, int page_count, bool pad = true);
  std::vector<RankedPage> retrieve(const std::string& query, const std::set<int>& excluded,
                                   int k) override;

 private:
  std::set<int> evidence_;
  int page_count_;
  bool pad_;
};

// Wraps a base retriever; each result is replaced, with probability
// flip_prob, by a random unexcluded non-evidence page not already in the
// result list (kept unchanged when no such page exists). Deterministic under
// the seed for a fixed call sequence.
class NoisyRetriever final : public PageRetriever {
 public:
  NoisyRetriever(std::unique_ptr<PageRetriever> base, double flip_prob, std::uint64_t rng_seed,
                 std::set<int> evidence, int page_count);
  std::vector<RankedPage> retrieve(const std::string& query, const std::set<int>& excluded,
                                   int k) override;

 private:
  std::unique_ptr<PageRetriever> base_;
  double flip_prob_;
  Rng rng_;
  std::set<int> evidence_;
  int page_count_;
};

// Builds one retriever per episode. The BM25 factory shares immutable
// per-document indexes across episodes.
class RetrieverFactory {
 public:
  virtual ~RetrieverFactory() = default;
  virtual std::unique_ptr<PageRetriever> make(const Document& doc, const QAItem& qa) = 0;
};

class Bm25Factory final : public RetrieverFactory {
 public:
  explicit Bm25Factory(Bm25Params params = {}) : params_(params) {}
  std::unique_ptr<PageRetriever> make(const Document& doc, const QAItem& qa) override;

 private:
  std::shared_ptr<const PageIndexStats> index_for(const Document& doc);

  Bm25Params params_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const PageIndexStats>> cache_;
};

class OracleRetrieverFactory final : public RetrieverFactory {
 public:
  std::unique_ptr<PageRetriever> make(const Document& doc, const QAItem& qa) override;
};

class NoisyRetrieverFactory final : public RetrieverFactory {
 public:
  NoisyRetrieverFactory(std::shared_ptr<RetrieverFactory> base, double flip_prob, std::uint64_t seed)
      : base_(std::move(base)), flip_prob_(flip_prob), seed_(seed) {}
  std::unique_ptr<PageRetriever> make(const Document& doc, const QAItem& qa) override;

 private:
  std::shared_ptr<RetrieverFactory> base_;
  double flip_prob_;
  std::uint64_t seed_;
};

}  // namespace docnav

#include "docnav/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace docnav {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

PageIndexStats build_index(const Document& doc) {
  PageIndexStats stats;
  stats.page_count = doc.page_count();
  long long total_length = 0;
  for (const Page& page : doc.pages) {
    std::map<std::string, int> freqs;
    const auto tokens = tokenize(page.text.value_or(""));
    for (const auto& tok : tokens) ++freqs[tok];
    stats.page_lengths.push_back(static_cast<int>(tokens.size()));
    total_length += static_cast<long long>(tokens.size());
    for (const auto& [term, _] : freqs) ++stats.doc_freqs[term];
    stats.term_freqs.push_back(std::move(freqs));
  }
  stats.avg_length = stats.page_count > 0 ? static_cast<double>(total_length) / stats.page_count : 0.0;
  return stats;
}

double bm25_score(const PageIndexStats& index, const std::vector<std::string>& query_terms,
                  int page_index, const Bm25Params& params) {
  const auto& freqs = index.term_freqs.at(static_cast<std::size_t>(page_index) - 1);
  const double len = index.page_lengths.at(static_cast<std::size_t>(page_index) - 1);
  double score = 0.0;
  for (const auto& term : query_terms) {
    const auto tf_it = freqs.find(term);
    if (tf_it == freqs.end()) continue;
    const double tf = tf_it->second;
    const double df = index.doc_freqs.at(term);
    const double idf = std::log(1.0 + (index.page_count - df + 0.5) / (df + 0.5));
    const double norm = 1.0 - params.b + params.b * len / index.avg_length;
    score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * norm);
  }
  return score;
}

namespace {

std::vector<RankedPage> take_top_k(std::vector<RankedPage>& candidates, int k) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const RankedPage& a, const RankedPage& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  if (static_cast<int>(candidates.size()) > k) candidates.resize(static_cast<std::size_t>(k));
  return candidates;
}

}  // namespace

Bm25Retriever::Bm25Retriever(std::shared_ptr<const PageIndexStats> index, Bm25Params params)
    : index_(std::move(index)), params_(params) {
  if (!index_) throw std::invalid_argument("Bm25Retriever: null index");
}

std::vector<RankedPage> Bm25Retriever::retrieve(const std::string& query, const std::set<int>& excluded,
                                                int k) {
  if (k < 1) throw std::invalid_argument("retrieve: k must be >= 1");
  const auto terms = tokenize(query);
  std::vector<RankedPage> candidates;
  for (int p = 1; p <= index_->page_count; ++p) {
    if (excluded.count(p)) continue;
    candidates.push_back({p, bm25_score(*index_, terms, p, params_)});
  }
  return take_top_k(candidates, k);
}

OracleRetriever::OracleRetriever(const QAItem& qa, int page_count, bool pad)
    : evidence_(qa.evidence_pages), page_count_(page_count), pad_(pad) {}

std::vector<RankedPage> OracleRetriever::retrieve(const std::string&, const std::set<int>& excluded,
                                                  int k) {
  if (k < 1) throw std::invalid_argument("retrieve: k must be >= 1");
  std::vector<RankedPage> out;
  for (int p : evidence_) {
    if (static_cast<int>(out.size()) == k) return out;
    if (!excluded.count(p)) out.push_back({p, 1.0});
  }
  if (pad_) {
    for (int p = 1; p <= page_count_ && static_cast<int>(out.size()) < k; ++p) {
      if (!excluded.count(p) && !evidence_.count(p)) out.push_back({p, 0.0});
    }
  }
  return out;
}

NoisyRetriever::NoisyRetriever(std::unique_ptr<PageRetriever> base, double flip_prob,
                               std::uint64_t rng_seed, std::set<int> evidence, int page_count)
    : base_(std::move(base)), flip_prob_(flip_prob), rng_(rng_seed), evidence_(std::move(evidence)),
      page_count_(page_count) {
  if (flip_prob_ < 0.0 || flip_prob_ > 1.0) {
    throw std::invalid_argument("NoisyRetriever: flip_prob must lie in [0,1]");
  }
}

std::vector<RankedPage> NoisyRetriever::retrieve(const std::string& query, const std::set<int>& excluded,
                                                 int k) {
  auto results = base_->retrieve(query, excluded, k);
  if (flip_prob_ == 0.0) return results;
  std::set<int> taken;
  for (const auto& r : results) taken.insert(r.index);
  for (auto& r : results) {
    if (!rng_.bernoulli(flip_prob_)) continue;
    std::vector<int> pool;
    for (int p = 1; p <= page_count_; ++p) {
      if (!excluded.count(p) && !evidence_.count(p) && !taken.count(p)) pool.push_back(p);
    }
    if (pool.empty()) continue;  // nothing to flip to; keep the original
    taken.erase(r.index);
    r.index = rng_.pick(pool);
    taken.insert(r.index);
  }
  return results;
}

std::shared_ptr<const PageIndexStats> Bm25Factory::index_for(const Document& doc) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(doc.doc_id);
  if (it != cache_.end()) return it->second;
  auto index = std::make_shared<const PageIndexStats>(build_index(doc));
  cache_.emplace(doc.doc_id, index);
  return index;
}

std::unique_ptr<PageRetriever> Bm25Factory::make(const Document& doc, const QAItem&) {
  return std::make_unique<Bm25Retriever>(index_for(doc), params_);
}

std::unique_ptr<PageRetriever> OracleRetrieverFactory::make(const Document& doc, const QAItem& qa) {
  return std::make_unique<OracleRetriever>(qa, doc.page_count());
}

std::unique_ptr<PageRetriever> NoisyRetrieverFactory::make(const Document& doc, const QAItem& qa) {
  return std::make_unique<NoisyRetriever>(base_->make(doc, qa), flip_prob_, mix_seed(seed_, qa.qa_id),
                                          qa.evidence_pages, doc.page_count());
}

}  // namespace docnav

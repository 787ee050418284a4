#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "docnav/image.hpp"

namespace docnav {

inline constexpr int kMaxPageWidth = 1024;
inline constexpr int kMaxPageHeight = 768;
inline constexpr int kPatchSize = 28;
inline constexpr const char* kNotAnswerable = "not answerable";

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Visual-token cost of a page: ceil(w/28) * ceil(h/28) square patches.
long long page_token_cost(int width, int height);

// Page raster, either held in memory or backed by a PNG on disk and decoded
// on demand. Dimensions are always known without decoding.
class PageImage {
 public:
  PageImage() = default;
  static PageImage from_pixels(Image img);
  static PageImage from_file(std::string path, int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool from_disk() const { return !path_.empty(); }
  const std::string& path() const { return path_; }

  // Decodes (or copies) the raster; not cached, callers keep it if needed.
  Image load() const;
  // PNG bytes of the raster; reads the backing file verbatim when present.
  std::vector<std::uint8_t> png_bytes() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::string path_;                     // empty when in-memory
  std::shared_ptr<const Image> pixels_;  // null when disk-backed
};

struct Page {
  int index = 0;  // 1-based, contiguous within a document
  PageImage image;
  std::optional<std::string> text;  // lexical retrieval + scripted agents only

  int width() const { return image.width(); }
  int height() const { return image.height(); }
  long long token_cost() const { return page_token_cost(width(), height()); }
};

struct Document {
  std::string doc_id;
  std::vector<Page> pages;

  int page_count() const { return static_cast<int>(pages.size()); }
  const Page& page(int index) const { return pages.at(static_cast<std::size_t>(index) - 1); }
};

enum class AnswerKind { Freeform, Identifier, Unanswerable };

std::string to_string(AnswerKind kind);
AnswerKind answer_kind_from_string(const std::string& s);

struct QAItem {
  std::string qa_id;
  std::string doc_id;
  std::string question;
  std::vector<std::string> gold_answers;
  AnswerKind answer_kind = AnswerKind::Freeform;
  std::set<int> evidence_pages;
};

struct Corpus {
  std::map<std::string, Document> documents;
  std::vector<QAItem> qa_items;

  const Document& document(const std::string& doc_id) const;
};

struct SynthSpec {
  int n_docs = 20;
  int pages_min = 12;
  int pages_max = 12;
  int facts_per_doc = 4;
  double multi_hop_fraction = 0.25;
  double unanswerable_fraction = 0.25;
  std::uint64_t rng_seed = 0;
  int page_width = 512;
  int page_height = 640;
};

// Loads the on-disk layout: <root>/docs/<doc_id>/page_NNNN.png (+ optional
// page_NNNN.txt) and <root>/qa.jsonl. Pages larger than 1024x768 are rescaled
// in memory to fit, preserving aspect ratio.
Corpus load_corpus(const std::string& root_path);

// Writes a corpus in the same layout. PNG encoding is deterministic.
void write_corpus(const Corpus& corpus, const std::string& root_path);

// Deterministic synthetic corpus with planted key-value facts. Every
// answerable item is solvable from the text of exactly its evidence pages.
Corpus synth_corpus(const SynthSpec& spec);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_corpus(const Corpus& corpus);

}  // namespace docnav

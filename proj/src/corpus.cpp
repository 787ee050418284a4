#include "docnav/corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "docnav/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace docnav {

long long page_token_cost(int width, int height) {
  if (width < 1 || height < 1) throw std::invalid_argument("page_token_cost: dimensions must be >= 1");
  const long long pw = (width + kPatchSize - 1) / kPatchSize;
  const long long ph = (height + kPatchSize - 1) / kPatchSize;
  return pw * ph;
}

PageImage PageImage::from_pixels(Image img) {
  PageImage p;
  p.width_ = img.width;
  p.height_ = img.height;
  p.pixels_ = std::make_shared<const Image>(std::move(img));
  return p;
}

PageImage PageImage::from_file(std::string path, int width, int height) {
  PageImage p;
  p.width_ = width;
  p.height_ = height;
  p.path_ = std::move(path);
  return p;
}

Image PageImage::load() const {
  if (pixels_) return *pixels_;
  if (path_.empty()) throw CorpusError("page image has no backing data");
  return png_read(path_);
}

std::vector<std::uint8_t> PageImage::png_bytes() const {
  if (!path_.empty()) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw CorpusError("cannot open page image " + path_);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  return png_encode(load());
}

std::string to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::Freeform: return "freeform";
    case AnswerKind::Identifier: return "identifier";
    case AnswerKind::Unanswerable: return "unanswerable";
  }
  return "freeform";
}

AnswerKind answer_kind_from_string(const std::string& s) {
  if (s == "freeform") return AnswerKind::Freeform;
  if (s == "identifier") return AnswerKind::Identifier;
  if (s == "unanswerable") return AnswerKind::Unanswerable;
  throw CorpusError("unknown answer_kind: " + s);
}

const Document& Corpus::document(const std::string& doc_id) const {
  auto it = documents.find(doc_id);
  if (it == documents.end()) throw CorpusError("unknown doc_id: " + doc_id);
  return it->second;
}

namespace {

std::string page_stem(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "page_%04d", index);
  return buf;
}

QAItem qa_from_json(const json& j) {
  QAItem qa;
  qa.qa_id = j.at("qa_id").get<std::string>();
  qa.doc_id = j.at("doc_id").get<std::string>();
  qa.question = j.at("question").get<std::string>();
  qa.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
  qa.answer_kind = answer_kind_from_string(j.at("answer_kind").get<std::string>());
  for (int p : j.at("evidence_pages").get<std::vector<int>>()) qa.evidence_pages.insert(p);
  return qa;
}

json qa_to_json(const QAItem& qa) {
  json j;
  j["qa_id"] = qa.qa_id;
  j["doc_id"] = qa.doc_id;
  j["question"] = qa.question;
  j["gold_answers"] = qa.gold_answers;
  j["answer_kind"] = to_string(qa.answer_kind);
  j["evidence_pages"] = std::vector<int>(qa.evidence_pages.begin(), qa.evidence_pages.end());
  return j;
}

void validate_qa(const QAItem& qa, const Corpus& corpus, std::vector<std::string>* out) {
  auto emit = [&](const std::string& msg) {
    if (!out) throw CorpusError(msg);
    out->push_back(msg);
  };
  auto doc_it = corpus.documents.find(qa.doc_id);
  if (doc_it == corpus.documents.end()) {
    emit("qa " + qa.qa_id + ": doc_id does not resolve: " + qa.doc_id);
    return;
  }
  const int n = doc_it->second.page_count();
  for (int p : qa.evidence_pages) {
    if (p < 1 || p > n) {
      emit("qa " + qa.qa_id + ": evidence page " + std::to_string(p) + " out of range 1.." + std::to_string(n));
    }
  }
  if (qa.gold_answers.empty()) emit("qa " + qa.qa_id + ": gold_answers empty");
  if (qa.answer_kind == AnswerKind::Unanswerable) {
    if (!qa.evidence_pages.empty()) emit("qa " + qa.qa_id + ": unanswerable item has evidence pages");
    if (qa.gold_answers != std::vector<std::string>{kNotAnswerable}) {
      emit(std::string("qa ") + qa.qa_id + ": unanswerable gold answer must be [\"" + kNotAnswerable + "\"]");
    }
  } else if (qa.evidence_pages.empty()) {
    emit("qa " + qa.qa_id + ": answerable item has no evidence pages");
  }
}

}  // namespace

Corpus load_corpus(const std::string& root_path) {
  const fs::path root(root_path);
  const fs::path docs_dir = root / "docs";
  if (!fs::is_directory(docs_dir)) throw CorpusError("corpus: missing docs/ under " + root_path);

  Corpus corpus;
  std::vector<std::string> doc_ids;
  for (const auto& entry : fs::directory_iterator(docs_dir)) {
    if (entry.is_directory()) doc_ids.push_back(entry.path().filename().string());
  }
  std::sort(doc_ids.begin(), doc_ids.end());

  for (const auto& doc_id : doc_ids) {
    Document doc;
    doc.doc_id = doc_id;
    const fs::path dir = docs_dir / doc_id;
    for (int index = 1;; ++index) {
      const fs::path png_path = dir / (page_stem(index) + ".png");
      if (!fs::exists(png_path)) {
        // Contiguity check: any higher-numbered page means a gap.
        const fs::path next = dir / (page_stem(index + 1) + ".png");
        if (fs::exists(next)) {
          throw CorpusError("doc " + doc_id + ": missing page file " + png_path.string());
        }
        break;
      }
      Page page;
      page.index = index;
      auto [w, h] = png_read_dims(png_path.string());
      if (w > kMaxPageWidth || h > kMaxPageHeight) {
        auto [nw, nh] = fit_within(w, h, kMaxPageWidth, kMaxPageHeight);
        page.image = PageImage::from_pixels(resize_area(png_read(png_path.string()), nw, nh));
      } else {
        page.image = PageImage::from_file(png_path.string(), w, h);
      }
      const fs::path txt_path = dir / (page_stem(index) + ".txt");
      if (fs::exists(txt_path)) {
        std::ifstream in(txt_path);
        std::stringstream ss;
        ss << in.rdbuf();
        page.text = ss.str();
      }
      doc.pages.push_back(std::move(page));
    }
    if (doc.pages.empty()) throw CorpusError("doc " + doc_id + ": no pages (missing " + page_stem(1) + ".png)");
    corpus.documents.emplace(doc_id, std::move(doc));
  }
  if (corpus.documents.empty()) throw CorpusError("corpus: no documents under " + docs_dir.string());

  const fs::path qa_path = root / "qa.jsonl";
  if (fs::exists(qa_path)) {
    std::ifstream in(qa_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw CorpusError("qa.jsonl line " + std::to_string(lineno) + ": " + e.what());
      }
      QAItem qa = qa_from_json(j);
      validate_qa(qa, corpus, nullptr);
      corpus.qa_items.push_back(std::move(qa));
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& root_path) {
  const fs::path root(root_path);
  fs::create_directories(root / "docs");
  for (const auto& [doc_id, doc] : corpus.documents) {
    const fs::path dir = root / "docs" / doc_id;
    fs::create_directories(dir);
    for (const Page& page : doc.pages) {
      const auto bytes = page.image.png_bytes();
      std::ofstream out(dir / (page_stem(page.index) + ".png"), std::ios::binary | std::ios::trunc);
      out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (page.text) {
        std::ofstream txt(dir / (page_stem(page.index) + ".txt"), std::ios::binary | std::ios::trunc);
        txt << *page.text;
      }
    }
  }
  std::ofstream qa_out(root / "qa.jsonl", std::ios::binary | std::ios::trunc);
  for (const QAItem& qa : corpus.qa_items) {
    qa_out << qa_to_json(qa).dump() << "\n";
  }
}

ValidationReport validate_corpus(const Corpus& corpus) {
  ValidationReport report;
  for (const auto& [doc_id, doc] : corpus.documents) {
    if (doc.pages.empty()) {
      report.violations.push_back("doc " + doc_id + ": no pages");
      continue;
    }
    std::set<int> seen;
    for (std::size_t i = 0; i < doc.pages.size(); ++i) {
      const Page& page = doc.pages[i];
      if (!seen.insert(page.index).second) {
        report.violations.push_back("doc " + doc_id + ": duplicate page index " + std::to_string(page.index));
      }
      if (page.index != static_cast<int>(i) + 1) {
        report.violations.push_back("doc " + doc_id + ": page index " + std::to_string(page.index) +
                                    " at position " + std::to_string(i + 1) + " (must be contiguous 1..N)");
      }
      if (page.width() > kMaxPageWidth || page.height() > kMaxPageHeight) {
        report.violations.push_back("doc " + doc_id + " page " + std::to_string(page.index) +
                                    ": exceeds " + std::to_string(kMaxPageWidth) + "x" +
                                    std::to_string(kMaxPageHeight));
      }
    }
  }
  for (const QAItem& qa : corpus.qa_items) {
    validate_qa(qa, corpus, &report.violations);
  }
  return report;
}

}  // namespace docnav

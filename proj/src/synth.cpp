#include <algorithm>
#include <cmath>

#include "docnav/corpus.hpp"
#include "docnav/rng.hpp"

namespace docnav {
namespace {

// Filler vocabulary. Deliberately avoids every word used by the question
// templates so that only the planted key carries signal for retrieval.
const std::vector<std::string> kFillerWords = {
    "ledger", "harbor", "quartz", "meadow", "copper", "lantern", "orchard", "timber",
    "granite", "velvet", "saffron", "monsoon", "pylon", "estuary", "cobalt", "drift",
    "mosaic", "turbine", "canyon", "ember", "willow", "ridge", "basalt", "prairie",
    "anchor", "beacon", "cinder", "dune", "fathom", "grove", "hollow", "inlet",
};

const std::vector<std::string> kValueAdjectives = {
    "amber", "crimson", "ivory", "jade", "onyx", "pearl", "russet", "sable",
    "teal", "umber", "violet", "ochre",
};

const std::vector<std::string> kValueNouns = {
    "falcon", "heron", "lynx", "marten", "osprey", "badger", "civet", "stoat",
    "tern", "vole", "wren", "ibis",
};

const std::string kKeyLetters = "bcdfghjkmnpqrstvwxz";

constexpr int kFactSlotsPerPage = 8;
constexpr int kTextScale = 2;
constexpr int kTextMargin = 12;

// Keys always mix letters and a digit; the text-scan oracle and the scripted
// agents rely on that shape to spot them inside a question.
std::string make_key(Rng& rng) {
  std::string key;
  for (int i = 0; i < 3; ++i) key += kKeyLetters[static_cast<std::size_t>(rng.uniform_int(0, 18))];
  key += static_cast<char>('2' + rng.uniform_int(0, 7));
  for (int i = 0; i < 3; ++i) key += kKeyLetters[static_cast<std::size_t>(rng.uniform_int(0, 18))];
  return key;
}

std::string make_value_phrase(Rng& rng) {
  return rng.pick(kValueAdjectives) + " " + rng.pick(kValueNouns);
}

enum class QAKind { Single, MultiHop, Unanswerable };

struct PlannedFact {
  QAKind kind;
  AnswerKind answer_kind;
  std::string key;
  std::string mid;    // multi-hop link token
  std::string value;  // gold answer
};

Image render_page(int width, int height, const std::vector<std::string>& lines) {
  Image img(width, height);
  // Faint border so thumbnails carry some visible page structure.
  img.fill_rect(0, 0, width, 2, 160, 160, 160);
  img.fill_rect(0, height - 2, width, 2, 160, 160, 160);
  img.fill_rect(0, 0, 2, height, 160, 160, 160);
  img.fill_rect(width - 2, 0, 2, height, 160, 160, 160);
  int y = kTextMargin;
  const int line_h = text_height(kTextScale) + 2;
  for (const auto& line : lines) {
    if (y + line_h > height - kTextMargin) break;
    draw_text(img, kTextMargin, y, line, kTextScale);
    y += line_h;
  }
  return img;
}

}  // namespace

Corpus synth_corpus(const SynthSpec& spec) {
  if (spec.n_docs < 1) throw CorpusError("synth: n_docs must be >= 1");
  if (spec.pages_min < 1 || spec.pages_min > spec.pages_max) throw CorpusError("synth: empty pages range");
  if (spec.facts_per_doc < 0) throw CorpusError("synth: facts_per_doc must be >= 0");
  if (spec.multi_hop_fraction < 0 || spec.multi_hop_fraction > 1 || spec.unanswerable_fraction < 0 ||
      spec.unanswerable_fraction > 1 || spec.multi_hop_fraction + spec.unanswerable_fraction > 1) {
    throw CorpusError("synth: fractions must lie in [0,1] and sum to <= 1");
  }
  if (spec.page_width < 64 || spec.page_width > kMaxPageWidth || spec.page_height < 64 ||
      spec.page_height > kMaxPageHeight) {
    throw CorpusError("synth: page size must lie within 64x64 .. 1024x768");
  }

  Corpus corpus;
  Rng rng(spec.rng_seed);

  for (int d = 1; d <= spec.n_docs; ++d) {
    char doc_buf[32];
    std::snprintf(doc_buf, sizeof(doc_buf), "doc_%04d", d);
    const std::string doc_id = doc_buf;

    const int n_pages = static_cast<int>(rng.uniform_int(spec.pages_min, spec.pages_max));

    // Plan the QA mix: unanswerable count first, then multi-hop among the
    // answerable remainder, single-hop split between freeform and identifier.
    const int n_una = static_cast<int>(std::lround(spec.facts_per_doc * spec.unanswerable_fraction));
    const int n_answerable = spec.facts_per_doc - n_una;
    const int n_multi = static_cast<int>(std::lround(n_answerable * spec.multi_hop_fraction));
    const int n_single = n_answerable - n_multi;

    const int lines_needed = n_single + 2 * n_multi;
    if (lines_needed > n_pages * kFactSlotsPerPage) {
      throw CorpusError("synth: facts_per_doc exceeds page capacity for " + doc_id);
    }

    std::vector<PlannedFact> facts;
    for (int i = 0; i < n_single; ++i) {
      PlannedFact f;
      f.kind = QAKind::Single;
      f.answer_kind = (i % 2 == 0) ? AnswerKind::Freeform : AnswerKind::Identifier;
      f.key = make_key(rng);
      f.value = f.answer_kind == AnswerKind::Freeform
                    ? make_value_phrase(rng)
                    : std::to_string(rng.uniform_int(1000, 9999));
      facts.push_back(std::move(f));
    }
    for (int i = 0; i < n_multi; ++i) {
      PlannedFact f;
      f.kind = QAKind::MultiHop;
      f.answer_kind = AnswerKind::Freeform;
      f.key = make_key(rng);
      f.mid = make_key(rng);
      f.value = make_value_phrase(rng);
      facts.push_back(std::move(f));
    }
    for (int i = 0; i < n_una; ++i) {
      PlannedFact f;
      f.kind = QAKind::Unanswerable;
      f.answer_kind = AnswerKind::Unanswerable;
      f.key = make_key(rng);
      f.value = kNotAnswerable;
      facts.push_back(std::move(f));
    }

    if (n_multi > 0 && n_pages < 2) throw CorpusError("synth: multi-hop facts need at least 2 pages");

    // Fact lines per page, bounded by the per-page slot budget.
    std::vector<std::vector<std::string>> fact_lines(static_cast<std::size_t>(n_pages));
    auto place_line = [&](const std::string& line, int exclude_page) {
      std::vector<int> eligible;
      for (int p = 1; p <= n_pages; ++p) {
        if (p == exclude_page) continue;
        if (fact_lines[static_cast<std::size_t>(p - 1)].size() <
            static_cast<std::size_t>(kFactSlotsPerPage)) {
          eligible.push_back(p);
        }
      }
      if (eligible.empty()) throw CorpusError("synth: facts_per_doc exceeds page capacity for " + doc_id);
      const int page = eligible[static_cast<std::size_t>(rng.uniform_int(
          0, static_cast<std::int64_t>(eligible.size()) - 1))];
      fact_lines[static_cast<std::size_t>(page - 1)].push_back(line);
      return page;
    };

    int qa_seq = 0;
    for (const PlannedFact& f : facts) {
      ++qa_seq;
      QAItem qa;
      qa.qa_id = doc_id + "_qa" + std::to_string(qa_seq);
      qa.doc_id = doc_id;
      switch (f.kind) {
        case QAKind::Single: {
          const int page = place_line(f.key + ": " + f.value, 0);
          qa.evidence_pages = {page};
          qa.question = f.answer_kind == AnswerKind::Identifier
                            ? "which number is filed under " + f.key + "?"
                            : "what is the value recorded for " + f.key + "?";
          qa.gold_answers = {f.value};
          qa.answer_kind = f.answer_kind;
          break;
        }
        case QAKind::MultiHop: {
          const int page_a = place_line(f.key + ": see " + f.mid, 0);
          const int page_b = place_line(f.mid + ": " + f.value, page_a);
          qa.evidence_pages = {page_a, page_b};
          qa.question = "what does the register referenced by " + f.key + " hold?";
          qa.gold_answers = {f.value};
          qa.answer_kind = AnswerKind::Freeform;
          break;
        }
        case QAKind::Unanswerable: {
          qa.question = "what is the value recorded for " + f.key + "?";
          qa.gold_answers = {kNotAnswerable};
          qa.answer_kind = AnswerKind::Unanswerable;
          break;
        }
      }
      corpus.qa_items.push_back(std::move(qa));
    }

    Document doc;
    doc.doc_id = doc_id;
    for (int p = 1; p <= n_pages; ++p) {
      std::vector<std::string> lines;
      lines.push_back("document " + doc_id + " page " + std::to_string(p));
      const int n_filler = static_cast<int>(rng.uniform_int(6, 10));
      for (int i = 0; i < n_filler; ++i) {
        std::string line = rng.pick(kFillerWords);
        for (int wj = 0; wj < 4; ++wj) line += " " + rng.pick(kFillerWords);
        lines.push_back(std::move(line));
      }
      for (const auto& fl : fact_lines[static_cast<std::size_t>(p - 1)]) lines.push_back(fl);

      Page page;
      page.index = p;
      page.image = PageImage::from_pixels(render_page(spec.page_width, spec.page_height, lines));
      std::string text;
      for (const auto& line : lines) {
        text += line;
        text += "\n";
      }
      page.text = std::move(text);
      doc.pages.push_back(std::move(page));
    }
    corpus.documents.emplace(doc_id, std::move(doc));
  }
  return corpus;
}

}  // namespace docnav

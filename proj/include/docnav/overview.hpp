#pragma once

#include <optional>
#include <vector>

#include "docnav/corpus.hpp"
#include "docnav/image.hpp"

namespace docnav {

inline constexpr int kThumbSize = 256;
inline constexpr int kDefaultGroupCapacity = 36;  // G
inline constexpr int kDefaultHeaderHeight = 28;   // h

struct PageRange {
  int first = 0;  // inclusive
  int last = 0;   // inclusive
  int size() const { return last - first + 1; }
};

// Consecutive groups of at most G page indices covering 1..N.
std::vector<PageRange> partition_groups(int page_count, int group_capacity);

// Near-square grid for n thumbnails: R = ceil(sqrt(n)), C = ceil(n/R).
std::pair<int, int> grid_dims(int n);

// One tiled overview image: an R x C grid of cells, each a header band of
// height h (carrying the absolute page number) over a 256x256 thumbnail.
// Pages fill cells row-major; trailing cells stay blank. Pixels are produced
// by render() on demand so that episode bookkeeping stays cheap.
struct OverviewImage {
  int group_index = 0;  // k, 1-based
  int rows = 0;
  int cols = 0;
  int header_height = 0;
  std::vector<int> cell_pages;  // row-major; 0 marks an empty cell
  const Document* doc = nullptr;

  int composite_width() const { return cols * kThumbSize; }
  int composite_height() const { return rows * (header_height + kThumbSize); }
  long long token_cost() const;
  std::optional<int> page_at(int row, int col) const;

  Image render() const;
};

struct OverviewSet {
  std::vector<OverviewImage> images;
  int group_capacity = kDefaultGroupCapacity;  // G
  int page_count = 0;                          // N

  int image_count() const { return static_cast<int>(images.size()); }  // K
};

OverviewSet build_overview(const Document& doc, int group_capacity = kDefaultGroupCapacity,
                           int header_height = kDefaultHeaderHeight);

// Total visual-token cost of the rendered set.
long long overview_token_cost(const OverviewSet& set);

// Same figure from page count alone; no document or pixels needed. Agrees
// with overview_token_cost(build_overview(doc, G, h)) for any N-page doc.
long long overview_token_cost(int page_count, int group_capacity = kDefaultGroupCapacity,
                              int header_height = kDefaultHeaderHeight);

}  // namespace docnav

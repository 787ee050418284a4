#include "docnav/overview.hpp"

#include <cmath>
#include <stdexcept>

namespace docnav {

std::vector<PageRange> partition_groups(int page_count, int group_capacity) {
  if (page_count < 1) throw std::invalid_argument("partition_groups: page_count must be >= 1");
  if (group_capacity < 1) throw std::invalid_argument("partition_groups: group_capacity must be >= 1");
  std::vector<PageRange> groups;
  for (int first = 1; first <= page_count; first += group_capacity) {
    groups.push_back({first, std::min(first + group_capacity - 1, page_count)});
  }
  return groups;
}

std::pair<int, int> grid_dims(int n) {
  if (n < 1) throw std::invalid_argument("grid_dims: n must be >= 1");
  const int rows = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int cols = (n + rows - 1) / rows;
  return {rows, cols};
}

long long OverviewImage::token_cost() const {
  return page_token_cost(composite_width(), composite_height());
}

std::optional<int> OverviewImage::page_at(int row, int col) const {
  const int page = cell_pages.at(static_cast<std::size_t>(row) * cols + col);
  if (page == 0) return std::nullopt;
  return page;
}

Image OverviewImage::render() const {
  if (!doc) throw std::logic_error("OverviewImage::render: no document attached");
  Image composite(composite_width(), composite_height());
  const int cell_h = header_height + kThumbSize;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const auto page_index = page_at(r, c);
      if (!page_index) continue;  // blank padding cell, no header either
      const int x0 = c * kThumbSize;
      const int y0 = r * cell_h;

      // Header band: absolute page number, centered, black on white.
      const std::string label = std::to_string(*page_index);
      const int scale = std::max(1, (header_height - 4) / 8);
      const int tx = x0 + std::max(0, (kThumbSize - text_width(label, scale)) / 2);
      const int ty = y0 + std::max(0, (header_height - text_height(scale)) / 2);
      draw_text(composite, tx, ty, label, scale);

      // Thumbnail: aspect-preserving letterbox onto the 256x256 canvas,
      // centered, white fill, no upsampling.
      const Page& page = doc->page(*page_index);
      const Image full = page.image.load();
      auto [tw, th] = fit_within(full.width, full.height, kThumbSize, kThumbSize);
      const Image thumb = resize_area(full, tw, th);
      composite.blit(thumb, x0 + (kThumbSize - tw) / 2, y0 + header_height + (kThumbSize - th) / 2);
    }
  }
  return composite;
}

OverviewSet build_overview(const Document& doc, int group_capacity, int header_height) {
  if (header_height < 1) throw std::invalid_argument("build_overview: header_height must be >= 1");
  OverviewSet set;
  set.group_capacity = group_capacity;
  set.page_count = doc.page_count();
  const auto groups = partition_groups(doc.page_count(), group_capacity);
  for (std::size_t k = 0; k < groups.size(); ++k) {
    OverviewImage img;
    img.group_index = static_cast<int>(k) + 1;
    auto [rows, cols] = grid_dims(groups[k].size());
    img.rows = rows;
    img.cols = cols;
    img.header_height = header_height;
    img.doc = &doc;
    img.cell_pages.assign(static_cast<std::size_t>(rows) * cols, 0);
    for (int i = 0; i < groups[k].size(); ++i) {
      img.cell_pages[static_cast<std::size_t>(i)] = groups[k].first + i;
    }
    set.images.push_back(std::move(img));
  }
  return set;
}

long long overview_token_cost(const OverviewSet& set) {
  long long total = 0;
  for (const auto& img : set.images) total += img.token_cost();
  return total;
}

long long overview_token_cost(int page_count, int group_capacity, int header_height) {
  long long total = 0;
  for (const PageRange& group : partition_groups(page_count, group_capacity)) {
    auto [rows, cols] = grid_dims(group.size());
    total += page_token_cost(cols * kThumbSize, rows * (header_height + kThumbSize));
  }
  return total;
}

}  // namespace docnav

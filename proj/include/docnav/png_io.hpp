#pragma once

#include <string>
#include <utility>
#include <vector>

#include "docnav/image.hpp"

namespace docnav {

// PNG read/write for 8-bit RGB; other PNG color types are converted on read.
// Writes use fixed encoder settings so identical pixels produce identical
// bytes (the corpus format relies on this for reproducible generation).

Image png_decode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> png_encode(const Image& img);

Image png_read(const std::string& path);
void png_write(const std::string& path, const Image& img);

// Reads width/height from the IHDR chunk without decoding pixel data.
std::pair<int, int> png_read_dims(const std::string& path);

}  // namespace docnav

#pragma once

#include <filesystem>

#include "morpheval/image.hpp"

namespace morpheval {

// Reads an 8-bit PNG as RGB. Palette and grayscale images are expanded;
// images with an alpha channel (or tRNS) are rejected with an explicit error,
// as is 16-bit depth. A pHYs chunk in meters is converted to PPI metadata.
ImageBuffer read_png(const std::filesystem::path& path);

// Writes 8-bit RGB. When the buffer carries PPI metadata a pHYs chunk is
// emitted (300 PPI = 11811 pixels/meter).
void write_png(const ImageBuffer& img, const std::filesystem::path& path);

}  // namespace morpheval

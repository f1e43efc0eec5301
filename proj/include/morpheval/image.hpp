#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace morpheval {

// 8-bit RGB raster, row-major, with optional pixels-per-inch metadata.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int width, int height);  // zero-filled

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint8_t& at(int x, int y, int c) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  const std::vector<std::uint8_t>& pixels() const { return pixels_; }
  std::vector<std::uint8_t>& pixels() { return pixels_; }

  std::optional<int> ppi() const { return ppi_; }
  void set_ppi(std::optional<int> ppi);

  bool same_dimensions(const ImageBuffer& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const ImageBuffer&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
  std::optional<int> ppi_;
};

// Per-channel double raster in [0, 1]; working representation of the
// print-scan pipeline so quantization happens exactly once.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // (y * width + x) * 3 + c

  double& at(int x, int y, int c) {
    return values[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  double at(int x, int y, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
};

FloatImage to_float(const ImageBuffer& img);
// Clamps to [0,1] and rounds each channel to 8 bits (the pipeline's single
// rounding step).
ImageBuffer quantize(const FloatImage& img);

// Bilinear sample with edge clamping; x/y in pixel-center coordinates.
double bilinear_sample(const ImageBuffer& img, double x, double y, int c);
double bilinear_sample(const FloatImage& img, double x, double y, int c);

FloatImage resample_bilinear(const FloatImage& src, int width, int height);
// to_float -> resample -> quantize; the reference resampler the print-scan
// simulator reduces to when every artifact channel is disabled.
ImageBuffer resample_bilinear(const ImageBuffer& src, int width, int height);

}  // namespace morpheval

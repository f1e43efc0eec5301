#include "morpheval/image.hpp"

#include <algorithm>
#include <cmath>

#include "morpheval/error.hpp"

namespace morpheval {

ImageBuffer::ImageBuffer(int width, int height)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0)
    fail("image dimensions must be positive, got ", width, "x", height);
  pixels_.assign(static_cast<std::size_t>(width) * height * kChannels, 0);
}

void ImageBuffer::set_ppi(std::optional<int> ppi) {
  if (ppi && *ppi <= 0) fail("ppi must be positive, got ", *ppi);
  ppi_ = ppi;
}

FloatImage to_float(const ImageBuffer& img) {
  FloatImage out;
  out.width = img.width();
  out.height = img.height();
  out.values.resize(img.pixels().size());
  for (std::size_t i = 0; i < out.values.size(); ++i)
    out.values[i] = img.pixels()[i] / 255.0;
  return out;
}

ImageBuffer quantize(const FloatImage& img) {
  ImageBuffer out(img.width, img.height);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    const double v = std::clamp(img.values[i], 0.0, 1.0);
    out.pixels()[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

namespace {

template <typename Img>
double sample_clamped(const Img& img, double x, double y, int c) {
  const int w = img.width;
  const int h = img.height;
  const double cx = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(cx));
  const int y0 = static_cast<int>(std::floor(cy));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = cx - x0;
  const double fy = cy - y0;
  const double top = (1.0 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bot = (1.0 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  return (1.0 - fy) * top + fy * bot;
}

struct U8View {
  const ImageBuffer& img;
  int width;
  int height;
  double at(int x, int y, int c) const {
    return static_cast<double>(img.at(x, y, c));
  }
};

}  // namespace

double bilinear_sample(const ImageBuffer& img, double x, double y, int c) {
  return sample_clamped(U8View{img, img.width(), img.height()}, x, y, c);
}

double bilinear_sample(const FloatImage& img, double x, double y, int c) {
  return sample_clamped(img, x, y, c);
}

FloatImage resample_bilinear(const FloatImage& src, int width, int height) {
  if (width <= 0 || height <= 0)
    fail("resample target must be positive, got ", width, "x", height);
  FloatImage out;
  out.width = width;
  out.height = height;
  out.values.resize(static_cast<std::size_t>(width) * height * 3);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double srcy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double srcx = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = bilinear_sample(src, srcx, srcy, c);
    }
  }
  return out;
}

ImageBuffer resample_bilinear(const ImageBuffer& src, int width, int height) {
  ImageBuffer out = quantize(resample_bilinear(to_float(src), width, height));
  out.set_ppi(src.ppi());
  return out;
}

}  // namespace morpheval

#include "morpheval/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

#include "morpheval/error.hpp"

namespace morpheval {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

constexpr double kInchesPerMeter = 1.0 / 0.0254;

}  // namespace

ImageBuffer read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail("cannot open ", path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail("libpng init failed");
  }

  std::vector<png_bytep> rows;
  ImageBuffer img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("failed to decode PNG ", path.string());
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path.string(), ": 16-bit PNG not supported (expected 8-bit RGB)");
  }
  if ((color_type & PNG_COLOR_MASK_ALPHA) != 0 ||
      png_get_valid(png, info, PNG_INFO_tRNS)) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path.string(), ": PNG with alpha channel rejected (expected RGB)");
  }

  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY) {
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  img = ImageBuffer(width, height);

  rows.resize(height);
  for (int y = 0; y < height; ++y)
    rows[y] = img.pixels().data() +
              static_cast<std::size_t>(y) * width * ImageBuffer::kChannels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  png_uint_32 res_x = 0, res_y = 0;
  int unit = 0;
  if (png_get_pHYs(png, info, &res_x, &res_y, &unit) &&
      unit == PNG_RESOLUTION_METER && res_x > 0) {
    img.set_ppi(static_cast<int>(std::lround(res_x / kInchesPerMeter)));
  }

  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const ImageBuffer& img, const std::filesystem::path& path) {
  if (img.width() <= 0 || img.height() <= 0) fail("cannot write empty image");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail("cannot open ", path.string(), " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) fail("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail("libpng init failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("failed to encode PNG ", path.string());
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  if (img.ppi()) {
    const auto ppm = static_cast<png_uint_32>(
        std::lround(*img.ppi() * kInchesPerMeter));
    png_set_pHYs(png, info, ppm, ppm, PNG_RESOLUTION_METER);
  }
  png_write_info(png, info);

  std::vector<png_const_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y)
    rows[y] = img.pixels().data() +
              static_cast<std::size_t>(y) * img.width() * ImageBuffer::kChannels;
  png_write_rows(png, const_cast<png_bytepp>(rows.data()),
                 static_cast<png_uint_32>(rows.size()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace morpheval

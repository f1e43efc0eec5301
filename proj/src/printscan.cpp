#include "morpheval/printscan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "morpheval/error.hpp"
#include "morpheval/noise.hpp"

namespace morpheval {

namespace {

// Stage ids keying the counter-based noise streams.
constexpr std::uint64_t kStageInk = 1;
constexpr std::uint64_t kStagePaper = 2;
constexpr std::uint64_t kStageMisalign = 3;
constexpr std::uint64_t kStageBorder = 4;

constexpr double kLumaR = 0.299, kLumaG = 0.587, kLumaB = 0.114;

void apply_color_shift(FloatImage& img, const ColorShift& cs) {
  const std::array<double, 9>& m = cs.matrix;
  for (std::size_t i = 0; i < img.values.size(); i += 3) {
    const double r = img.values[i];
    const double g = img.values[i + 1];
    const double b = img.values[i + 2];
    img.values[i] = m[0] * r + m[1] * g + m[2] * b + cs.offset[0];
    img.values[i + 1] = m[3] * r + m[4] * g + m[5] * b + cs.offset[1];
    img.values[i + 2] = m[6] * r + m[7] * g + m[8] * b + cs.offset[2];
  }
}

void add_halftone(FloatImage& img, double period, double amplitude) {
  const double k = 2.0 * std::numbers::pi / period;
  for (int y = 0; y < img.height; ++y) {
    const double sy = std::sin(k * y);
    for (int x = 0; x < img.width; ++x) {
      const double dot = amplitude * std::sin(k * x) * sy;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) += dot;
    }
  }
}

void add_ink_noise(FloatImage& img, double sigma, std::uint64_t seed) {
  for (std::size_t i = 0; i < img.values.size(); ++i)
    img.values[i] += sigma * noise_gaussian(seed, kStageInk, i);
}

void add_paper_texture(FloatImage& img, double period, double amplitude,
                       std::uint64_t seed) {
  // Low-frequency luminance field: Gaussian lattice at `period` spacing,
  // bilinearly interpolated, added equally to all channels.
  const int gw = static_cast<int>(std::floor((img.width - 1) / period)) + 2;
  auto node = [&](int ix, int iy) {
    return noise_gaussian(seed, kStagePaper,
                          static_cast<std::uint64_t>(iy) * gw + ix);
  };
  for (int y = 0; y < img.height; ++y) {
    const double gy = y / period;
    const int iy = static_cast<int>(std::floor(gy));
    const double fy = gy - iy;
    for (int x = 0; x < img.width; ++x) {
      const double gx = x / period;
      const int ix = static_cast<int>(std::floor(gx));
      const double fx = gx - ix;
      const double top = (1.0 - fx) * node(ix, iy) + fx * node(ix + 1, iy);
      const double bot =
          (1.0 - fx) * node(ix, iy + 1) + fx * node(ix + 1, iy + 1);
      const double value = amplitude * ((1.0 - fy) * top + fy * bot);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) += value;
    }
  }
}

FloatImage misalign(const FloatImage& img, const PrintScanParams& p) {
  const double rot_deg =
      (2.0 * noise_uniform(p.seed, kStageMisalign, 0) - 1.0) *
      p.misalign_max_rotation_deg;
  const double tx = (2.0 * noise_uniform(p.seed, kStageMisalign, 1) - 1.0) *
                    p.misalign_max_translation;
  const double ty = (2.0 * noise_uniform(p.seed, kStageMisalign, 2) - 1.0) *
                    p.misalign_max_translation;
  const double theta = rot_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double cx = (img.width - 1) / 2.0;
  const double cy = (img.height - 1) / 2.0;

  FloatImage out;
  out.width = img.width;
  out.height = img.height;
  out.values.resize(img.values.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - cx - tx;
      const double dy = y - cy - ty;
      const double sx = cos_t * dx + sin_t * dy + cx;
      const double sy = -sin_t * dx + cos_t * dy + cy;
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = bilinear_sample(img, sx, sy, c);
    }
  }
  return out;
}

void add_glare(FloatImage& img, Point center, double strength, double radius) {
  const double inv = 1.0 / (2.0 * radius * radius);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double dx = x - center.x;
      const double dy = y - center.y;
      const double g = strength * std::exp(-(dx * dx + dy * dy) * inv);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) += g;
    }
  }
}

FloatImage border_shift(const FloatImage& img, int jitter, std::uint64_t seed) {
  const int span = 2 * jitter + 1;
  const int dx = static_cast<int>(std::floor(
                     noise_uniform(seed, kStageBorder, 0) * span)) -
                 jitter;
  const int dy = static_cast<int>(std::floor(
                     noise_uniform(seed, kStageBorder, 1) * span)) -
                 jitter;
  FloatImage out;
  out.width = img.width;
  out.height = img.height;
  out.values.resize(img.values.size());
  for (int y = 0; y < img.height; ++y) {
    const int sy = std::clamp(y + dy, 0, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      const int sx = std::clamp(x + dx, 0, img.width - 1);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

}  // namespace

bool ColorShift::is_identity() const {
  static constexpr std::array<double, 9> kId = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  return matrix == kId && offset == std::array<double, 3>{0, 0, 0};
}

ColorShift default_color_shift() {
  ColorShift cs;
  cs.matrix = {1.03, 0, 0, 0, 1.0, 0, 0, 0, 0.98};
  return cs;
}

ColorShift icc_mismatch_color_shift() {
  // Saturation boost about luma, then exaggerated per-channel gains.
  constexpr double k = 1.25;
  const double gains[3] = {1.15, 1.0, 0.85};
  ColorShift cs;
  const double luma[3] = {kLumaR, kLumaG, kLumaB};
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col)
      cs.matrix[row * 3 + col] =
          gains[row] * ((row == col ? k : 0.0) + (1.0 - k) * luma[col]);
  return cs;
}

void PrintScanParams::validate() const {
  if (target_width < 1 || target_height < 1)
    fail("target size must be positive");
  if (target_ppi < 1) fail("target ppi must be positive");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(name, " must be >= 0");
  };
  nonneg(ink_noise_sigma, "ink_noise_sigma");
  nonneg(halftone_amplitude, "halftone_amplitude");
  nonneg(paper_texture_amplitude, "paper_texture_amplitude");
  nonneg(glare_strength, "glare_strength");
  nonneg(misalign_max_translation, "misalign_max_translation");
  nonneg(misalign_max_rotation_deg, "misalign_max_rotation_deg");
  if (!(halftone_period > 0.0)) fail("halftone_period must be > 0");
  if (!(paper_texture_period > 0.0)) fail("paper_texture_period must be > 0");
  if (!(glare_radius > 0.0)) fail("glare_radius must be > 0");
  if (border_jitter < 0) fail("border_jitter must be >= 0");
  for (double v : color_shift.matrix)
    if (!std::isfinite(v)) fail("color matrix entries must be finite");
  for (double v : color_shift.offset)
    if (!std::isfinite(v)) fail("color offset entries must be finite");
}

PrintScanParams PrintScanParams::null_channel() {
  PrintScanParams p;
  p.ink_noise_sigma = 0.0;
  p.halftone_amplitude = 0.0;
  p.paper_texture_amplitude = 0.0;
  p.color_shift = ColorShift{};
  p.glare_center.reset();
  p.glare_strength = 0.0;
  p.border_jitter = 0;
  p.misalign_max_translation = 0.0;
  p.misalign_max_rotation_deg = 0.0;
  return p;
}

PrintScanParams builtin_printscan_preset(std::string_view name) {
  if (name == "default") return PrintScanParams{};
  if (name == "icc-mismatch") {
    PrintScanParams p;
    p.icc_mismatch_mode = true;
    return p;
  }
  if (name == "null") return PrintScanParams::null_channel();
  fail("unknown preset \"", std::string(name),
       "\" (expected default, icc-mismatch or null)");
}

ImageBuffer simulate_print_scan(const ImageBuffer& input,
                                const PrintScanParams& params) {
  params.validate();
  if (input.width() < 32 || input.height() < 32)
    fail("input smaller than 32x32 refused (", input.width(), "x",
         input.height(), "): resampling would fabricate content");

  FloatImage f = resample_bilinear(to_float(input), params.target_width,
                                   params.target_height);

  const ColorShift& shift = params.icc_mismatch_mode
                                ? icc_mismatch_color_shift()
                                : params.color_shift;
  if (!shift.is_identity()) apply_color_shift(f, shift);
  if (params.halftone_amplitude > 0.0)
    add_halftone(f, params.halftone_period, params.halftone_amplitude);
  if (params.ink_noise_sigma > 0.0)
    add_ink_noise(f, params.ink_noise_sigma, params.seed);
  if (params.paper_texture_amplitude > 0.0)
    add_paper_texture(f, params.paper_texture_period,
                      params.paper_texture_amplitude, params.seed);
  if (params.misalign_max_translation > 0.0 ||
      params.misalign_max_rotation_deg > 0.0)
    f = misalign(f, params);
  if (params.glare_center && params.glare_strength > 0.0)
    add_glare(f, *params.glare_center, params.glare_strength,
              params.glare_radius);
  if (params.border_jitter > 0)
    f = border_shift(f, params.border_jitter, params.seed);

  ImageBuffer out = quantize(f);
  out.set_ppi(params.target_ppi);
  return out;
}

ImageBuffer difference_image(const ImageBuffer& digital,
                             const ImageBuffer& printscanned, double gain) {
  if (!digital.same_dimensions(printscanned))
    fail("dimension mismatch: ", digital.width(), "x", digital.height(),
         " vs ", printscanned.width(), "x", printscanned.height());
  if (!(gain >= 1.0)) fail("gain must be >= 1, got ", gain);

  ImageBuffer out(digital.width(), digital.height());
  for (std::size_t i = 0; i < out.pixels().size(); ++i) {
    const double d = std::abs(static_cast<double>(printscanned.pixels()[i]) -
                              static_cast<double>(digital.pixels()[i]));
    out.pixels()[i] =
        static_cast<std::uint8_t>(std::min(255.0, std::round(gain * d)));
  }
  return out;
}

double artifact_energy(const ImageBuffer& digital,
                       const ImageBuffer& printscanned) {
  if (!digital.same_dimensions(printscanned))
    fail("dimension mismatch: ", digital.width(), "x", digital.height(),
         " vs ", printscanned.width(), "x", printscanned.height());
  double sum = 0.0;
  for (std::size_t i = 0; i < digital.pixels().size(); ++i) {
    const double d = static_cast<double>(printscanned.pixels()[i]) -
                     static_cast<double>(digital.pixels()[i]);
    sum += d * d;
  }
  return std::sqrt(sum / digital.pixels().size());
}

namespace {

nlohmann::ordered_json color_shift_to_json(const ColorShift& cs) {
  nlohmann::ordered_json j;
  j["matrix"] = {{cs.matrix[0], cs.matrix[1], cs.matrix[2]},
                 {cs.matrix[3], cs.matrix[4], cs.matrix[5]},
                 {cs.matrix[6], cs.matrix[7], cs.matrix[8]}};
  j["offset"] = {cs.offset[0], cs.offset[1], cs.offset[2]};
  return j;
}

ColorShift color_shift_from_json(const nlohmann::json& j) {
  ColorShift cs;
  const auto& m = j.at("matrix");
  if (!m.is_array() || m.size() != 3)
    fail("color_shift.matrix must be a 3x3 array");
  for (int row = 0; row < 3; ++row) {
    if (!m[row].is_array() || m[row].size() != 3)
      fail("color_shift.matrix must be a 3x3 array");
    for (int col = 0; col < 3; ++col)
      cs.matrix[row * 3 + col] = m[row][col].get<double>();
  }
  if (j.contains("offset")) {
    const auto& o = j.at("offset");
    if (!o.is_array() || o.size() != 3)
      fail("color_shift.offset must have 3 entries");
    for (int i = 0; i < 3; ++i) cs.offset[i] = o[i].get<double>();
  }
  return cs;
}

}  // namespace

PrintScanParams load_printscan_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open ", path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(path.string(), ": invalid JSON: ", e.what());
  }

  static const std::set<std::string> known = {
      "preset_version",        "seed",
      "target_width",          "target_height",
      "target_ppi",            "ink_noise_sigma",
      "halftone_period",       "halftone_amplitude",
      "paper_texture_period",  "paper_texture_amplitude",
      "color_shift",           "icc_mismatch_mode",
      "glare_center",          "glare_strength",
      "glare_radius",          "border_jitter",
      "misalign_max_translation", "misalign_max_rotation_deg"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key))
      fail(path.string(), ": unknown parameter \"", key, "\"");

  PrintScanParams p;
  try {
    if (doc.contains("preset_version") &&
        doc["preset_version"].get<int>() != 1)
      fail(path.string(), ": unsupported preset_version");
    if (doc.contains("seed")) p.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("target_width"))
      p.target_width = doc["target_width"].get<int>();
    if (doc.contains("target_height"))
      p.target_height = doc["target_height"].get<int>();
    if (doc.contains("target_ppi")) p.target_ppi = doc["target_ppi"].get<int>();
    if (doc.contains("ink_noise_sigma"))
      p.ink_noise_sigma = doc["ink_noise_sigma"].get<double>();
    if (doc.contains("halftone_period"))
      p.halftone_period = doc["halftone_period"].get<double>();
    if (doc.contains("halftone_amplitude"))
      p.halftone_amplitude = doc["halftone_amplitude"].get<double>();
    if (doc.contains("paper_texture_period"))
      p.paper_texture_period = doc["paper_texture_period"].get<double>();
    if (doc.contains("paper_texture_amplitude"))
      p.paper_texture_amplitude = doc["paper_texture_amplitude"].get<double>();
    if (doc.contains("color_shift"))
      p.color_shift = color_shift_from_json(doc["color_shift"]);
    if (doc.contains("icc_mismatch_mode"))
      p.icc_mismatch_mode = doc["icc_mismatch_mode"].get<bool>();
    if (doc.contains("glare_center") && !doc["glare_center"].is_null()) {
      const auto& g = doc["glare_center"];
      if (!g.is_array() || g.size() != 2)
        fail(path.string(), ": glare_center must be [x, y] or null");
      p.glare_center = Point{g[0].get<double>(), g[1].get<double>()};
    }
    if (doc.contains("glare_strength"))
      p.glare_strength = doc["glare_strength"].get<double>();
    if (doc.contains("glare_radius"))
      p.glare_radius = doc["glare_radius"].get<double>();
    if (doc.contains("border_jitter"))
      p.border_jitter = doc["border_jitter"].get<int>();
    if (doc.contains("misalign_max_translation"))
      p.misalign_max_translation =
          doc["misalign_max_translation"].get<double>();
    if (doc.contains("misalign_max_rotation_deg"))
      p.misalign_max_rotation_deg =
          doc["misalign_max_rotation_deg"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(path.string(), ": ", e.what());
  }
  p.validate();
  return p;
}

void write_printscan_params(const PrintScanParams& p,
                            const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["preset_version"] = 1;
  j["seed"] = p.seed;
  j["target_width"] = p.target_width;
  j["target_height"] = p.target_height;
  j["target_ppi"] = p.target_ppi;
  j["ink_noise_sigma"] = p.ink_noise_sigma;
  j["halftone_period"] = p.halftone_period;
  j["halftone_amplitude"] = p.halftone_amplitude;
  j["paper_texture_period"] = p.paper_texture_period;
  j["paper_texture_amplitude"] = p.paper_texture_amplitude;
  j["color_shift"] = color_shift_to_json(p.color_shift);
  j["icc_mismatch_mode"] = p.icc_mismatch_mode;
  if (p.glare_center)
    j["glare_center"] = {p.glare_center->x, p.glare_center->y};
  else
    j["glare_center"] = nullptr;
  j["glare_strength"] = p.glare_strength;
  j["glare_radius"] = p.glare_radius;
  j["border_jitter"] = p.border_jitter;
  j["misalign_max_translation"] = p.misalign_max_translation;
  j["misalign_max_rotation_deg"] = p.misalign_max_rotation_deg;

  std::ofstream out(path);
  if (!out) fail("cannot open ", path.string(), " for writing");
  out << j.dump(2) << '\n';
  if (!out) fail("failed writing ", path.string());
}

}  // namespace morpheval

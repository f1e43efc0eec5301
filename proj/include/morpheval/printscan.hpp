#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "morpheval/image.hpp"
#include "morpheval/types.hpp"

namespace morpheval {

// Linear color transform applied per pixel: rgb' = matrix * rgb + offset,
// on channel values in [0, 1]. Row-major 3x3.
struct ColorShift {
  std::array<double, 9> matrix = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  std::array<double, 3> offset = {0, 0, 0};

  bool is_identity() const;
  bool operator==(const ColorShift&) const = default;
};

// Mild warm cast typical of dye-ink prints: +3% red gain, -2% blue gain.
ColorShift default_color_shift();
// Exaggerated miscalibration: +/-15% channel gains plus a saturation boost.
ColorShift icc_mismatch_color_shift();

// Fully parametric, seeded description of the simulated print-scan channel.
// Every stochastic field is a pure function of (seed, stage, pixel index).
struct PrintScanParams {
  std::uint64_t seed = 0;
  int target_width = 600;
  int target_height = 600;
  int target_ppi = 300;

  double ink_noise_sigma = 2.0 / 255.0;        // per-channel Gaussian
  double halftone_period = 4.0;                // px
  double halftone_amplitude = 1.5 / 255.0;
  double paper_texture_period = 64.0;          // px, low-frequency luminance
  double paper_texture_amplitude = 1.0 / 255.0;

  ColorShift color_shift = default_color_shift();
  bool icc_mismatch_mode = false;  // substitutes icc_mismatch_color_shift()

  std::optional<Point> glare_center;  // off unless set
  double glare_strength = 0.0;
  double glare_radius = 75.0;  // px

  int border_jitter = 2;                    // max crop misregistration, px
  double misalign_max_translation = 0.5;    // px, sub-pixel
  double misalign_max_rotation_deg = 0.3;

  void validate() const;  // throws Error

  // Everything off: pure resample to target geometry.
  static PrintScanParams null_channel();

  bool operator==(const PrintScanParams&) const = default;
};

// Named built-in presets: "default" and "icc-mismatch".
PrintScanParams builtin_printscan_preset(std::string_view name);
PrintScanParams load_printscan_params(const std::filesystem::path& path);
void write_printscan_params(const PrintScanParams& params,
                            const std::filesystem::path& path);

// Simulated print-scan channel. Fixed stage order: resample to print
// geometry, color shift, halftone modulation, ink noise, paper texture,
// misalignment resample, optional glare, border jitter crop, quantize.
// Identical (input, params) pairs produce bit-identical outputs. Inputs
// smaller than 32x32 are refused.
ImageBuffer simulate_print_scan(const ImageBuffer& input,
                                const PrintScanParams& params);

// Per-pixel clamp(gain * |printscanned - digital|); gain >= 1.
ImageBuffer difference_image(const ImageBuffer& digital,
                             const ImageBuffer& printscanned, double gain);

// Root-mean-square per-channel difference, in [0, 255].
double artifact_energy(const ImageBuffer& digital,
                       const ImageBuffer& printscanned);

}  // namespace morpheval

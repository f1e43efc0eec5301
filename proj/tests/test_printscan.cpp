#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "morpheval/error.hpp"
#include "morpheval/png_io.hpp"
#include "morpheval/printscan.hpp"
#include "testutil.hpp"

using namespace morpheval;
using testutil::TempDir;
using testutil::TestRng;

namespace {

// Spatial mean and standard deviation of (output - reference) in [0,1] units.
struct Residual {
  double mean[3];
  double stddev;
};

Residual residual_stats(const ImageBuffer& out, const double reference[3]) {
  Residual r{{0, 0, 0}, 0};
  const std::size_t n = out.pixels().size() / 3;
  for (std::size_t i = 0; i < out.pixels().size(); ++i)
    r.mean[i % 3] += out.pixels()[i] / 255.0;
  for (int c = 0; c < 3; ++c) r.mean[c] /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < out.pixels().size(); ++i) {
    const double d = out.pixels()[i] / 255.0 - reference[i % 3] -
                     (r.mean[i % 3] - reference[i % 3]);
    var += d * d;
  }
  r.stddev = std::sqrt(var / static_cast<double>(out.pixels().size()));
  return r;
}

}  // namespace

TEST_CASE("null channel equals the pure resampler bit-exactly") {
  TestRng rng(80);
  const ImageBuffer input = testutil::random_image(rng, 150, 130);
  PrintScanParams params = PrintScanParams::null_channel();
  params.seed = 1234;
  const ImageBuffer simulated = simulate_print_scan(input, params);
  ImageBuffer resampled = resample_bilinear(input, 600, 600);
  CHECK(simulated.pixels() == resampled.pixels());
  CHECK(simulated.width() == 600);
  CHECK(simulated.height() == 600);
  CHECK(simulated.ppi() == std::optional<int>(300));
}

TEST_CASE("same-size resample is an exact copy") {
  TestRng rng(79);
  const ImageBuffer img = testutil::random_image(rng, 41, 33);
  CHECK(resample_bilinear(img, 41, 33).pixels() == img.pixels());
}

TEST_CASE("identical seeds give bit-identical outputs, different seeds differ") {
  TestRng rng(81);
  const ImageBuffer input = testutil::random_image(rng, 80, 80);
  PrintScanParams params;
  params.seed = 99;
  const ImageBuffer a = simulate_print_scan(input, params);
  const ImageBuffer b = simulate_print_scan(input, params);
  CHECK(a == b);
  params.seed = 100;
  const ImageBuffer c = simulate_print_scan(input, params);
  CHECK(a.pixels() != c.pixels());
}

TEST_CASE("small inputs are refused") {
  TestRng rng(82);
  const ImageBuffer tiny = testutil::random_image(rng, 31, 64);
  CHECK_THROWS_WITH_AS(simulate_print_scan(tiny, PrintScanParams{}),
                       doctest::Contains("32x32"), Error);
}

TEST_CASE("mid-gray statistics match the configured noise model") {
  const ImageBuffer gray = testutil::uniform_image(64, 64, 128, 128, 128);
  const double g = 128.0 / 255.0;

  // Ink noise only: residual std tracks sigma, mean tracks the color shift.
  {
    PrintScanParams p = PrintScanParams::null_channel();
    p.target_width = 256;
    p.target_height = 256;
    p.color_shift = default_color_shift();
    p.ink_noise_sigma = 4.0 / 255.0;
    p.seed = 7;
    const ImageBuffer out = simulate_print_scan(gray, p);
    const double expected[3] = {1.03 * g, g, 0.98 * g};
    const Residual r = residual_stats(out, expected);
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(r.mean[c] - expected[c]) <= 1.0 / 255.0);
    CHECK(r.stddev == doctest::Approx(p.ink_noise_sigma).epsilon(0.2));
  }

  // Halftone only: dot screen variance is amplitude^2 / 4.
  {
    PrintScanParams p = PrintScanParams::null_channel();
    p.target_width = 256;
    p.target_height = 256;
    p.halftone_amplitude = 6.0 / 255.0;
    p.halftone_period = 4.0;
    p.seed = 8;
    const ImageBuffer out = simulate_print_scan(gray, p);
    const double expected[3] = {g, g, g};
    const Residual r = residual_stats(out, expected);
    CHECK(r.stddev == doctest::Approx(p.halftone_amplitude / 2.0).epsilon(0.2));
  }

  // Paper texture only: bilinear interpolation of unit Gaussian nodes has
  // mean square 4/9 when averaged over sub-cell positions.
  {
    PrintScanParams p = PrintScanParams::null_channel();
    p.target_width = 512;
    p.target_height = 512;
    p.paper_texture_amplitude = 6.0 / 255.0;
    p.paper_texture_period = 16.0;
    p.seed = 9;
    const ImageBuffer out = simulate_print_scan(gray, p);
    const double expected[3] = {g, g, g};
    const Residual r = residual_stats(out, expected);
    const double predicted = p.paper_texture_amplitude * std::sqrt(4.0 / 9.0);
    CHECK(r.stddev == doctest::Approx(predicted).epsilon(0.2));
  }

  // Combined channels without geometric passes: variances add.
  {
    PrintScanParams p = PrintScanParams::null_channel();
    p.target_width = 512;
    p.target_height = 512;
    p.color_shift = default_color_shift();
    p.ink_noise_sigma = 2.0 / 255.0;
    p.halftone_amplitude = 1.5 / 255.0;
    p.halftone_period = 4.0;
    p.paper_texture_amplitude = 1.0 / 255.0;
    p.paper_texture_period = 16.0;
    p.seed = 10;
    const ImageBuffer out = simulate_print_scan(gray, p);
    const double expected[3] = {1.03 * g, g, 0.98 * g};
    const Residual r = residual_stats(out, expected);
    const double predicted = std::sqrt(
        p.ink_noise_sigma * p.ink_noise_sigma +
        p.halftone_amplitude * p.halftone_amplitude / 4.0 +
        (4.0 / 9.0) * p.paper_texture_amplitude * p.paper_texture_amplitude);
    for (int c = 0; c < 3; ++c)
      CHECK(std::abs(r.mean[c] - expected[c]) <= 1.0 / 255.0);
    CHECK(r.stddev == doctest::Approx(predicted).epsilon(0.2));
  }
}

TEST_CASE("difference_image clamp and identity behavior") {
  const ImageBuffer a = testutil::uniform_image(16, 16, 100, 100, 100);
  const ImageBuffer b = testutil::uniform_image(16, 16, 110, 110, 110);

  const ImageBuffer zero = difference_image(a, a, 10.0);
  for (auto px : zero.pixels()) CHECK(px == 0);

  const ImageBuffer raw = difference_image(a, b, 1.0);
  for (auto px : raw.pixels()) CHECK(px == 10);

  const ImageBuffer amplified = difference_image(a, b, 10.0);
  for (auto px : amplified.pixels()) CHECK(px == 100);

  const ImageBuffer clamped = difference_image(a, b, 30.0);
  for (auto px : clamped.pixels()) CHECK(px == 255);

  const ImageBuffer c = testutil::uniform_image(8, 16, 0, 0, 0);
  CHECK_THROWS_WITH_AS(difference_image(a, c, 1.0),
                       doctest::Contains("dimension mismatch"), Error);
  CHECK_THROWS_AS(difference_image(a, b, 0.5), Error);
}

TEST_CASE("artifact_energy is an RMS difference") {
  const ImageBuffer a = testutil::uniform_image(16, 16, 100, 100, 100);
  CHECK(artifact_energy(a, a) == 0.0);
  const ImageBuffer b = testutil::uniform_image(16, 16, 110, 110, 110);
  CHECK(artifact_energy(a, b) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("default simulation has positive energy, icc mode has more") {
  TestRng rng(84);
  int icc_higher = 0;
  const int trials = 20;
  for (int i = 0; i < trials; ++i) {
    const ImageBuffer input = testutil::random_image(rng, 64, 64);
    PrintScanParams def;
    def.seed = 1000 + i;
    def.target_width = 128;
    def.target_height = 128;
    PrintScanParams icc = def;
    icc.icc_mismatch_mode = true;
    const ImageBuffer ref = resample_bilinear(input, 128, 128);
    const double e_def = artifact_energy(ref, simulate_print_scan(input, def));
    const double e_icc = artifact_energy(ref, simulate_print_scan(input, icc));
    CHECK(e_def > 0.0);
    if (e_icc > e_def) ++icc_higher;
  }
  CHECK(icc_higher >= 19);
}

TEST_CASE("artifact energy grows with ink noise sigma") {
  TestRng rng(85);
  const ImageBuffer input = testutil::random_image(rng, 64, 64);
  const ImageBuffer ref = resample_bilinear(input, 128, 128);
  const double sigmas[] = {0.0, 1.0 / 255, 2.0 / 255, 4.0 / 255, 8.0 / 255};
  double prev = -1.0;
  for (double sigma : sigmas) {
    double total = 0.0;
    for (int seed = 0; seed < 5; ++seed) {
      PrintScanParams p;
      p.target_width = 128;
      p.target_height = 128;
      p.ink_noise_sigma = sigma;
      p.seed = static_cast<std::uint64_t>(seed);
      total += artifact_energy(ref, simulate_print_scan(input, p));
    }
    CHECK(total / 5.0 > prev);
    prev = total / 5.0;
  }
}

TEST_CASE("simulated output carries 300 PPI metadata and pHYs bytes") {
  TestRng rng(86);
  TempDir dir("phys");
  const ImageBuffer input = testutil::random_image(rng, 64, 64);
  PrintScanParams p;
  p.seed = 5;
  const ImageBuffer out = simulate_print_scan(input, p);
  CHECK(out.ppi() == std::optional<int>(300));
  write_png(out, dir.file("out.png"));

  // Raw chunk scan: pHYs payload must be 11811 px/m in both axes, meter unit.
  const std::string bytes = testutil::read_bytes(dir.file("out.png"));
  const auto pos = bytes.find("pHYs");
  REQUIRE(pos != std::string::npos);
  auto be32 = [&](std::size_t at) {
    return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at]))
            << 24) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 1]))
            << 16) |
           (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 2]))
            << 8) |
           static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + 3]));
  };
  CHECK(be32(pos + 4) == 11811u);
  CHECK(be32(pos + 8) == 11811u);
  CHECK(static_cast<unsigned char>(bytes[pos + 12]) == 1);  // meters

  const ImageBuffer back = read_png(dir.file("out.png"));
  CHECK(back.ppi() == std::optional<int>(300));
}

TEST_CASE("printscan params round trip through JSON presets") {
  TempDir dir("preset");
  PrintScanParams p = builtin_printscan_preset("default");
  p.seed = 77;
  p.glare_center = Point{300.0, 200.0};
  p.glare_strength = 0.05;
  write_printscan_params(p, dir.file("p.json"));
  const PrintScanParams back = load_printscan_params(dir.file("p.json"));
  CHECK(back == p);

  const PrintScanParams icc = builtin_printscan_preset("icc-mismatch");
  CHECK(icc.icc_mismatch_mode);
  CHECK_THROWS_AS(builtin_printscan_preset("bogus"), Error);

  testutil::write_text(dir.file("bad.json"), "{\"ink_noise_sgima\": 0.1}");
  CHECK_THROWS_WITH_AS(load_printscan_params(dir.file("bad.json")),
                       doctest::Contains("unknown parameter"), Error);

  testutil::write_text(dir.file("neg.json"), "{\"ink_noise_sigma\": -0.1}");
  CHECK_THROWS_AS(load_printscan_params(dir.file("neg.json")), Error);
}

TEST_CASE("repo preset files match the built-in presets") {
  // Versioned preset files ship with the repo; keep them in sync with code.
  const char* root = getenv("MORPHEVAL_SOURCE_DIR");
  const std::filesystem::path presets =
      root ? std::filesystem::path(root) / "presets"
           : std::filesystem::path(__FILE__).parent_path().parent_path() /
                 "presets";
  CHECK(load_printscan_params(presets / "printscan-default.json") ==
        builtin_printscan_preset("default"));
  CHECK(load_printscan_params(presets / "printscan-icc-mismatch.json") ==
        builtin_printscan_preset("icc-mismatch"));
}

TEST_CASE("glare and border jitter stages perturb the output") {
  TestRng rng(87);
  const ImageBuffer input = testutil::random_image(rng, 64, 64);
  PrintScanParams base = PrintScanParams::null_channel();
  base.target_width = 128;
  base.target_height = 128;
  base.seed = 3;
  const ImageBuffer plain = simulate_print_scan(input, base);

  PrintScanParams glare = base;
  glare.glare_center = Point{64.0, 64.0};
  glare.glare_strength = 0.2;
  glare.glare_radius = 30.0;
  const ImageBuffer with_glare = simulate_print_scan(input, glare);
  CHECK(artifact_energy(plain, with_glare) > 0.0);
  // Glare brightens the center more than the corner.
  CHECK(with_glare.at(64, 64, 0) >= plain.at(64, 64, 0));

  PrintScanParams jitter = base;
  jitter.border_jitter = 2;
  jitter.seed = 12;  // draws a nonzero offset
  const ImageBuffer shifted = simulate_print_scan(input, jitter);
  CHECK(artifact_energy(plain, shifted) > 0.0);
}

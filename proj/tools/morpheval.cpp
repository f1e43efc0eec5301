// morpheval: one binary exposing every pipeline stage as a subcommand so the
// whole evaluation (morph -> printscan -> score externally -> harness) can be
// scripted reproducibly. All randomness flows from --seed; there is no
// wall-clock or OS entropy anywhere.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "morpheval/error.hpp"
#include "morpheval/harness.hpp"
#include "morpheval/loaders.hpp"
#include "morpheval/metrics.hpp"
#include "morpheval/morph.hpp"
#include "morpheval/png_io.hpp"
#include "morpheval/printscan.hpp"
#include "morpheval/version.hpp"

namespace fs = std::filesystem;
using namespace morpheval;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 64;

// Machine-readable single-line JSON error on stderr.
void print_error(const std::string& category, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = category;
  j["message"] = message;
  std::cerr << j.dump() << '\n';
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool verbose = false;
  int jobs = 0;  // 0 = all available cores
};

int effective_jobs(const GlobalOpts& g) {
  if (g.jobs > 0) return g.jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void verbose_config(const GlobalOpts& g, const std::string& subcommand,
                    const nlohmann::ordered_json& config) {
  if (!g.verbose) return;
  nlohmann::ordered_json j;
  j["toolkit_version"] = kVersion;
  j["subcommand"] = subcommand;
  j["seed"] = g.seed;
  j["jobs"] = effective_jobs(g);
  j["config"] = config;
  std::cerr << j.dump() << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open ", path.string(), " for writing");
  out << text;
  if (!out) fail("failed writing ", path.string());
}

nlohmann::ordered_json mesh_to_json(const TriangleMesh& mesh) {
  nlohmann::ordered_json j;
  j["vertices"] = nlohmann::ordered_json::array();
  for (const Point& p : mesh.vertices) j["vertices"].push_back({p.x, p.y});
  j["triangles"] = nlohmann::ordered_json::array();
  for (const auto& t : mesh.triangles)
    j["triangles"].push_back({t[0], t[1], t[2]});
  j["duplicates_removed"] = mesh.duplicates_removed;
  return j;
}

// --- subcommand option structs ---------------------------------------------

struct MorphOpts {
  std::string image_a, landmarks_a, image_b, landmarks_b, out;
  double alpha = 0.5;
  bool no_boundary_points = false;
  std::string mesh_debug;
};

struct PrintScanOpts {
  std::string in_path, out_path;
  std::string preset = "default";
  std::string preset_file;
};

struct DiffOpts {
  std::string a, b, out;
  double gain = 1.0;
};

struct ScoreOpts {
  std::string scores;
  double delta = 0.0;
};

struct MacerOpts {
  std::string scores;
  std::vector<double> targets = {0.001, 0.01, 0.05};
  std::string rule = "largest-below";
};

struct RocOpts {
  std::string scores;
  std::string out;
};

struct CalibrateOpts {
  std::string impostors;
  double target_fmr = 0.001;
};

struct KfoldOpts {
  std::string scores;
  int k = kDefaultFolds;
  std::string out;
};

struct HarnessOpts {
  std::string manifest;
  std::string out_dir;
  std::vector<std::string> formats = {"csv", "markdown", "json"};
};

struct EmaOpts {
  int batch_size = 0;
};

// --- subcommand handlers -----------------------------------------------------

int run_morph(const GlobalOpts& g, const MorphOpts& o) {
  verbose_config(g, "morph",
                 {{"image_a", o.image_a},
                  {"landmarks_a", o.landmarks_a},
                  {"image_b", o.image_b},
                  {"landmarks_b", o.landmarks_b},
                  {"out", o.out},
                  {"alpha", o.alpha},
                  {"boundary_points", !o.no_boundary_points},
                  {"mesh_debug", o.mesh_debug}});
  const ImageBuffer a = read_png(o.image_a);
  const ImageBuffer b = read_png(o.image_b);
  const LandmarkSet lm_a = load_landmarks(o.landmarks_a);
  const LandmarkSet lm_b = load_landmarks(o.landmarks_b);

  MorphParams params;
  params.alpha = o.alpha;
  params.boundary_augmentation = !o.no_boundary_points;
  params.jobs = effective_jobs(g);

  const WarpResult result = warp_blend(a, lm_a, b, lm_b, params);
  write_png(result.image, o.out);
  if (!o.mesh_debug.empty())
    write_text(o.mesh_debug, mesh_to_json(result.mesh).dump(2) + "\n");
  if (result.mesh.duplicates_removed > 0) {
    nlohmann::ordered_json warn;
    warn["warning"] = "duplicate points removed before triangulation";
    warn["count"] = result.mesh.duplicates_removed;
    std::cerr << warn.dump() << '\n';
  }
  if (g.verbose)
    std::cerr << "quality: degenerate_triangles="
              << result.quality.degenerate_triangles
              << " filled_pixels=" << result.quality.filled_pixels << '\n';
  return kExitOk;
}

int run_printscan(const GlobalOpts& g, const PrintScanOpts& o) {
  PrintScanParams params = o.preset_file.empty()
                               ? builtin_printscan_preset(o.preset)
                               : load_printscan_params(o.preset_file);
  // An explicit --seed wins over the preset's stored seed.
  if (g.seed_given || o.preset_file.empty()) params.seed = g.seed;
  verbose_config(
      g, "printscan",
      {{"in", o.in_path},
       {"out", o.out_path},
       {"preset", o.preset_file.empty() ? o.preset : o.preset_file}});

  const fs::path in_path(o.in_path);
  const fs::path out_path(o.out_path);
  if (!fs::exists(in_path)) fail("input path ", o.in_path, " does not exist");

  std::vector<fs::path> inputs;
  const bool dir_mode = fs::is_directory(in_path);
  if (dir_mode) {
    for (const auto& entry : fs::directory_iterator(in_path))
      if (entry.is_regular_file() && entry.path().extension() == ".png")
        inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) fail("no .png files in ", o.in_path);
    fs::create_directories(out_path);
  } else {
    inputs.push_back(in_path);
    if (out_path.has_parent_path())
      fs::create_directories(out_path.parent_path());
  }

  // Per-image parallelism: each simulation is a pure function of
  // (bytes, params), so the job count cannot change output bytes.
  const int jobs =
      std::min<int>(effective_jobs(g), static_cast<int>(inputs.size()));
  std::vector<std::string> errors(inputs.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        const ImageBuffer img = read_png(inputs[i]);
        const ImageBuffer out = simulate_print_scan(img, params);
        const fs::path dest =
            dir_mode ? out_path / inputs[i].filename() : out_path;
        write_png(out, dest);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  if (jobs <= 1) {
    work(0, inputs.size());
  } else {
    std::vector<std::thread> workers;
    const std::size_t per = (inputs.size() + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      const std::size_t begin = static_cast<std::size_t>(j) * per;
      if (begin >= inputs.size()) break;
      workers.emplace_back(work, begin, std::min(inputs.size(), begin + per));
    }
    for (auto& w : workers) w.join();
  }
  for (std::size_t i = 0; i < inputs.size(); ++i)
    if (!errors[i].empty()) fail(inputs[i].string(), ": ", errors[i]);
  return kExitOk;
}

int run_diff(const GlobalOpts& g, const DiffOpts& o) {
  verbose_config(g, "diff",
                 {{"a", o.a}, {"b", o.b}, {"out", o.out}, {"gain", o.gain}});
  const ImageBuffer a = read_png(o.a);
  const ImageBuffer b = read_png(o.b);
  write_png(difference_image(a, b, o.gain), o.out);
  return kExitOk;
}

int run_calibrate(const GlobalOpts& g, const CalibrateOpts& o) {
  verbose_config(g, "calibrate",
                 {{"impostors", o.impostors}, {"target_fmr", o.target_fmr}});
  const ImposterScoreSet impostors = load_impostor_scores(o.impostors);
  const ThresholdCalibration cal = calibrate_threshold(impostors, o.target_fmr);
  nlohmann::ordered_json j;
  j["delta"] = cal.delta;
  j["target_fmr"] = cal.target_fmr;
  j["achieved_fmr"] = cal.achieved_fmr;
  std::cout << j.dump() << '\n';
  return kExitOk;
}

int run_kfold(const GlobalOpts& g, const KfoldOpts& o) {
  verbose_config(g, "kfold", {{"scores", o.scores}, {"k", o.k}});
  const std::vector<ClassifierRecord> records =
      load_classifier_scores(o.scores);
  const std::vector<FoldSplit> folds = stratified_kfold(records, o.k, g.seed);
  nlohmann::ordered_json j;
  j["k"] = o.k;
  j["seed"] = g.seed;
  j["folds"] = nlohmann::ordered_json::array();
  for (const FoldSplit& f : folds) {
    nlohmann::ordered_json fold;
    fold["train"] = f.train;
    fold["validation"] = f.validation;
    j["folds"].push_back(std::move(fold));
  }
  const std::string text = j.dump(2) + "\n";
  if (o.out.empty())
    std::cout << text;
  else
    write_text(o.out, text);
  return kExitOk;
}

int run_harness(const GlobalOpts& g, const HarnessOpts& o) {
  verbose_config(g, "harness",
                 {{"manifest", o.manifest}, {"out_dir", o.out_dir}});
  for (const std::string& f : o.formats)
    if (f != "csv" && f != "markdown" && f != "json")
      fail("unknown report format \"", f,
           "\" (expected csv, markdown or json)");

  const EvaluationManifest manifest = load_manifest(o.manifest);
  const MetricReport report = run_studies(manifest);

  fs::create_directories(o.out_dir);
  const fs::path dir(o.out_dir);
  for (const std::string& f : o.formats) {
    if (f == "csv")
      write_text(dir / "report.csv", render_report(report, ReportFormat::Csv));
    else if (f == "markdown")
      write_text(dir / "report.md",
                 render_report(report, ReportFormat::Markdown));
    else if (f == "json")
      write_text(dir / "report.json",
                 render_report(report, ReportFormat::Json));
  }
  if (report.has_missing_cells()) {
    print_error("partial", "report completed with absent cells");
    return kExitPartial;
  }
  return kExitOk;
}

int run_ema(const GlobalOpts& g, const EmaOpts& o) {
  verbose_config(g, "ema", {{"batch_size", o.batch_size}});
  std::cout << format_double(ema_decay(o.batch_size)) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morpheval: heterogeneous morph-attack evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));

  GlobalOpts g;
  CLI::Option* seed_opt =
      app.add_option("--seed", g.seed, "Seed for every stochastic stage")
          ->default_val(0);
  app.add_flag("--verbose", g.verbose,
               "Print the toolkit version and effective configuration");
  app.add_option("--jobs", g.jobs,
                 "Worker threads for parallel stages (0 = all cores); output "
                 "bytes do not depend on this")
      ->default_val(0);

  MorphOpts morph_opts;
  CLI::App* morph =
      app.add_subcommand("morph", "Landmark-based morph of two images");
  morph->add_option("--image-a", morph_opts.image_a, "First source PNG")
      ->required();
  morph
      ->add_option("--landmarks-a", morph_opts.landmarks_a,
                   "Landmark JSON for image A")
      ->required();
  morph->add_option("--image-b", morph_opts.image_b, "Second source PNG")
      ->required();
  morph
      ->add_option("--landmarks-b", morph_opts.landmarks_b,
                   "Landmark JSON for image B")
      ->required();
  morph->add_option("--out", morph_opts.out, "Output PNG")->required();
  morph->add_option("--alpha", morph_opts.alpha,
                    "Blend factor for geometry and color, in [0,1]");
  morph->add_flag("--no-boundary-points", morph_opts.no_boundary_points,
                  "Skip the 8 canvas boundary points (morph covers only the "
                  "landmark hull)");
  morph->add_option("--mesh-debug", morph_opts.mesh_debug,
                    "Write the triangulation as JSON to this path");

  PrintScanOpts ps_opts;
  CLI::App* printscan = app.add_subcommand(
      "printscan", "Simulate the print-scan channel for a PNG or a directory");
  printscan->add_option("--in", ps_opts.in_path, "Input PNG or directory")
      ->required();
  printscan->add_option("--out", ps_opts.out_path, "Output PNG or directory")
      ->required();
  printscan->add_option(
      "--preset", ps_opts.preset,
      "Built-in parameter preset: default, icc-mismatch or null");
  printscan->add_option("--preset-file", ps_opts.preset_file,
                        "JSON parameter file (overrides --preset)");

  DiffOpts diff_opts;
  CLI::App* diff = app.add_subcommand(
      "diff", "Amplified absolute difference of two equally sized PNGs");
  diff->add_option("--a", diff_opts.a, "First PNG")->required();
  diff->add_option("--b", diff_opts.b, "Second PNG")->required();
  diff->add_option("--out", diff_opts.out, "Output PNG")->required();
  diff->add_option("--gain", diff_opts.gain, "Amplification factor, >= 1");

  CLI::App* metrics = app.add_subcommand("metrics", "Score-file metrics");
  metrics->require_subcommand(1);

  ScoreOpts mmpmr_opts;
  CLI::App* metrics_mmpmr = metrics->add_subcommand(
      "mmpmr", "MMPMR of a similarity score file at a threshold");
  metrics_mmpmr->add_option("--scores", mmpmr_opts.scores, "Similarity CSV")
      ->required();
  metrics_mmpmr
      ->add_option("--delta", mmpmr_opts.delta, "Verification threshold")
      ->required();

  ScoreOpts prodavg_opts;
  CLI::App* metrics_prodavg = metrics->add_subcommand(
      "prodavg", "ProdAvg-MMPMR of a similarity score file at a threshold");
  metrics_prodavg
      ->add_option("--scores", prodavg_opts.scores, "Similarity CSV")
      ->required();
  metrics_prodavg
      ->add_option("--delta", prodavg_opts.delta, "Verification threshold")
      ->required();

  RocOpts eer_opts;
  CLI::App* metrics_eer =
      metrics->add_subcommand("eer", "Equal error rate of a classifier file");
  metrics_eer->add_option("--scores", eer_opts.scores, "Classifier CSV")
      ->required();

  MacerOpts macer_opts;
  CLI::App* metrics_macer =
      metrics->add_subcommand("macer", "MACER at fixed BPCER operating points");
  metrics_macer->add_option("--scores", macer_opts.scores, "Classifier CSV")
      ->required();
  metrics_macer->add_option("--bpcer-targets", macer_opts.targets,
                            "BPCER operating points in (0,1)");
  metrics_macer->add_option("--rule", macer_opts.rule,
                            "Threshold rule: largest-below or smallest-above");

  RocOpts roc_opts;
  CLI::App* metrics_roc = metrics->add_subcommand(
      "roc", "Operating points (threshold, BPCER, MACER) as CSV");
  metrics_roc->add_option("--scores", roc_opts.scores, "Classifier CSV")
      ->required();
  metrics_roc->add_option("--out", roc_opts.out,
                          "Output CSV path (stdout when omitted)");

  CalibrateOpts cal_opts;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Calibrate a verification threshold at a target FMR");
  calibrate->add_option("--impostors", cal_opts.impostors, "Impostor CSV")
      ->required();
  calibrate->add_option("--target-fmr", cal_opts.target_fmr,
                        "Target false match rate in (0,1)");

  KfoldOpts kfold_opts;
  CLI::App* kfold = app.add_subcommand(
      "kfold", "Stratified k-fold split of a classifier file");
  kfold->add_option("--scores", kfold_opts.scores, "Classifier CSV")
      ->required();
  kfold->add_option("--k", kfold_opts.k, "Number of folds");
  kfold->add_option("--out", kfold_opts.out,
                    "Output JSON path (stdout when omitted)");

  HarnessOpts harness_opts;
  CLI::App* harness = app.add_subcommand(
      "harness", "Run the vulnerability and detectability studies");
  harness->add_option("--manifest", harness_opts.manifest, "Manifest JSON")
      ->required();
  harness->add_option("--out-dir", harness_opts.out_dir, "Report directory")
      ->required();
  harness->add_option("--formats", harness_opts.formats,
                      "Report formats to write: csv, markdown, json");

  EmaOpts ema_opts;
  CLI::App* ema =
      app.add_subcommand("ema", "EMA decay rate for a training batch size");
  ema->add_option("--batch-size", ema_opts.batch_size, "Batch size, >= 1")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (app.got_subcommand(morph)) return run_morph(g, morph_opts);
    if (app.got_subcommand(printscan)) return run_printscan(g, ps_opts);
    if (app.got_subcommand(diff)) return run_diff(g, diff_opts);
    if (app.got_subcommand(metrics)) {
      if (metrics->got_subcommand(metrics_mmpmr)) {
        verbose_config(
            g, "metrics mmpmr",
            {{"scores", mmpmr_opts.scores}, {"delta", mmpmr_opts.delta}});
        const MorphScoreSet set = load_similarity_scores(mmpmr_opts.scores);
        std::cout << format_double(mmpmr(set, mmpmr_opts.delta)) << '\n';
        return kExitOk;
      }
      if (metrics->got_subcommand(metrics_prodavg)) {
        verbose_config(
            g, "metrics prodavg",
            {{"scores", prodavg_opts.scores}, {"delta", prodavg_opts.delta}});
        const MorphScoreSet set = load_similarity_scores(prodavg_opts.scores);
        std::cout << format_double(prodavg_mmpmr(set, prodavg_opts.delta))
                  << '\n';
        return kExitOk;
      }
      if (metrics->got_subcommand(metrics_eer)) {
        verbose_config(g, "metrics eer", {{"scores", eer_opts.scores}});
        const auto records = load_classifier_scores(eer_opts.scores);
        std::cout << format_double(equal_error_rate(records)) << '\n';
        return kExitOk;
      }
      if (metrics->got_subcommand(metrics_macer)) {
        verbose_config(g, "metrics macer",
                       {{"scores", macer_opts.scores},
                        {"bpcer_targets", macer_opts.targets},
                        {"rule", macer_opts.rule}});
        BpcerThresholdRule rule;
        if (macer_opts.rule == "largest-below")
          rule = BpcerThresholdRule::LargestNotAbove;
        else if (macer_opts.rule == "smallest-above")
          rule = BpcerThresholdRule::SmallestNotBelow;
        else
          fail("unknown rule \"", macer_opts.rule,
               "\" (expected largest-below or smallest-above)");
        const auto records = load_classifier_scores(macer_opts.scores);
        const DetectorOperatingReport report =
            macer_at_bpcer(records, macer_opts.targets, rule);
        nlohmann::ordered_json j;
        j["eer"] = report.eer;
        j["macer_at_bpcer"] = nlohmann::ordered_json::array();
        for (const auto& [target, value] : report.macer_at_bpcer)
          j["macer_at_bpcer"].push_back({{"bpcer", target}, {"macer", value}});
        std::cout << j.dump() << '\n';
        return kExitOk;
      }
      if (metrics->got_subcommand(metrics_roc)) {
        verbose_config(g, "metrics roc", {{"scores", roc_opts.scores}});
        const auto records = load_classifier_scores(roc_opts.scores);
        const RocCurve curve = compute_roc(records);
        std::string text = "threshold,false_accept_rate,false_reject_rate\n";
        for (const RocPoint& p : curve.points)
          text += format_double(p.threshold) + "," +
                  format_double(p.false_accept_rate) + "," +
                  format_double(p.false_reject_rate) + "\n";
        if (roc_opts.out.empty())
          std::cout << text;
        else
          write_text(roc_opts.out, text);
        return kExitOk;
      }
    }
    if (app.got_subcommand(calibrate)) return run_calibrate(g, cal_opts);
    if (app.got_subcommand(kfold)) return run_kfold(g, kfold_opts);
    if (app.got_subcommand(harness)) return run_harness(g, harness_opts);
    if (app.got_subcommand(ema)) return run_ema(g, ema_opts);
  } catch (const Error& e) {
    print_error("input", e.what());
    return kExitInputError;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitInputError;
  }
  print_error("usage", "no subcommand");
  return kExitUsage;
}

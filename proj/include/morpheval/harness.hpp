#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "morpheval/metrics.hpp"
#include "morpheval/types.hpp"

namespace morpheval {

// Bona fide composition an S-MAD detector was trained on.
enum class TrainingComposition { Digital, PrintScan, DigitalPlusPrintScan };

std::string_view to_string(TrainingComposition c);
TrainingComposition training_composition_from_string(std::string_view s);

struct VulnerabilityBinding {
  std::string dataset;
  std::string algorithm;
  std::string fr_system;
  ScenarioConfig scenario;
  std::filesystem::path scores;     // similarity CSV
  std::filesystem::path impostors;  // impostor CSV
};

struct DetectabilityBinding {
  TrainingComposition training = TrainingComposition::Digital;
  std::string algorithm;
  ScenarioConfig scenario;
  std::filesystem::path scores;  // classifier CSV
};

// Declarative description of a full evaluation grid plus the score files
// backing each cell. Loaded from a single JSON document; relative paths are
// resolved against the manifest's directory.
struct EvaluationManifest {
  double target_fmr = 0.001;
  std::vector<std::string> datasets;
  std::vector<std::string> morph_algorithms;
  std::vector<std::string> fr_systems;
  std::vector<ScenarioConfig> scenarios;  // subset of the four pairings
  std::vector<TrainingComposition> training_compositions;
  std::vector<VulnerabilityBinding> vulnerability;
  std::vector<DetectabilityBinding> detectability;
};

// Parses and validates: every referenced file exists, every scenario label is
// one of the four pairings, no duplicate bindings. Throws Error otherwise.
EvaluationManifest load_manifest(const std::filesystem::path& path);

inline constexpr std::array<double, 3> kReportBpcerTargets = {0.001, 0.01,
                                                              0.05};

struct VulnerabilityCell {
  std::string algorithm;
  std::string dataset;
  std::string fr_system;
  std::string scenario;  // label
  bool present = false;
  std::string note;  // diagnostic when absent
  double prodavg_mmpmr_pct = 0.0;
  ThresholdCalibration calibration;
  std::string scores_path;
  std::string scores_sha256;
  std::string impostors_path;
  std::string impostors_sha256;
};

struct DetectabilityCell {
  std::string training;   // composition string form
  std::string algorithm;
  std::string scenario;   // label
  bool present = false;
  std::string note;
  double eer_pct = 0.0;
  std::array<double, 3> macer_pct = {0, 0, 0};  // at BPCER 0.1%, 1%, 5%
  std::string scores_path;
  std::string scores_sha256;
};

// Tabular results plus the provenance needed to reproduce every cell:
// input digests, the calibration each cell used, toolkit version.
struct MetricReport {
  std::string toolkit_version;
  double target_fmr = 0.001;
  std::vector<VulnerabilityCell> vulnerability;
  std::vector<DetectabilityCell> detectability;

  bool has_missing_cells() const;
};

// Evaluates every (algorithm, dataset, fr_system, scenario) grid cell:
// calibrate delta at the manifest's target FMR from the bound impostor set,
// then ProdAvg-MMPMR as a percentage. Unbound or unusable cells are marked
// absent and the run continues.
MetricReport run_vulnerability_study(const EvaluationManifest& manifest);

// Evaluates every (training_composition, algorithm, scenario) cell: EER and
// MACER at BPCER 0.1%/1%/5%, as percentages.
MetricReport run_detectability_study(const EvaluationManifest& manifest);

// Both studies in one report.
MetricReport run_studies(const EvaluationManifest& manifest);

enum class ReportFormat { Csv, Markdown, Json };

// Deterministic rendering. CSV and Markdown print percentages to 2 decimal
// places (half-even); Markdown bolds each column's maximum within an
// algorithm block; JSON carries full-precision values and provenance.
std::string render_report(const MetricReport& report, ReportFormat format);

inline constexpr int kDefaultFolds = 5;

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Stratified k-fold split of record indices: validation folds partition the
// index set and per-fold class counts are within one of proportional.
// Deterministic given seed (library-owned shuffle, not std::shuffle).
std::vector<FoldSplit> stratified_kfold(std::span<const ClassifierRecord> records,
                                        int k, std::uint64_t seed);

}  // namespace morpheval

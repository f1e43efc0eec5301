#include "morpheval/harness.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "morpheval/digest.hpp"
#include "morpheval/error.hpp"
#include "morpheval/loaders.hpp"
#include "morpheval/version.hpp"

namespace morpheval {

std::string_view to_string(TrainingComposition c) {
  switch (c) {
    case TrainingComposition::Digital:
      return "digital";
    case TrainingComposition::PrintScan:
      return "print-scan";
    case TrainingComposition::DigitalPlusPrintScan:
      return "digital+print-scan";
  }
  fail("invalid training composition");
}

TrainingComposition training_composition_from_string(std::string_view s) {
  if (s == "digital") return TrainingComposition::Digital;
  if (s == "print-scan") return TrainingComposition::PrintScan;
  if (s == "digital+print-scan")
    return TrainingComposition::DigitalPlusPrintScan;
  fail("unknown training composition \"", std::string(s),
       "\" (expected digital, print-scan or digital+print-scan)");
}

namespace {

std::vector<std::string> string_list(const nlohmann::json& doc,
                                     const std::string& key) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  const auto& arr = doc.at(key);
  if (!arr.is_array()) fail("manifest: \"", key, "\" must be an array");
  std::set<std::string> seen;
  for (const auto& item : arr) {
    std::string value = item.get<std::string>();
    if (!seen.insert(value).second)
      fail("manifest: duplicate entry \"", value, "\" in \"", key, "\"");
    out.push_back(std::move(value));
  }
  return out;
}

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::string& rel) {
  std::filesystem::path p(rel);
  return p.is_absolute() ? p : base / p;
}

void require_file(const std::filesystem::path& p) {
  if (!std::filesystem::is_regular_file(p))
    fail("manifest references missing file ", p.string());
}

template <typename T>
void require_member(const std::vector<T>& list, const T& value,
                    const char* what) {
  if (std::find(list.begin(), list.end(), value) == list.end())
    fail("manifest: binding references ", what, " not declared in the grid");
}

}  // namespace

EvaluationManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open ", path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(path.string(), ": invalid JSON: ", e.what());
  }

  static const std::set<std::string> known = {
      "target_fmr",    "datasets",      "morph_algorithms",
      "fr_systems",    "scenarios",     "training_compositions",
      "vulnerability", "detectability"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) fail(path.string(), ": unknown key \"", key, "\"");

  EvaluationManifest m;
  const std::filesystem::path base = path.parent_path();
  try {
    if (doc.contains("target_fmr")) m.target_fmr = doc["target_fmr"].get<double>();
    if (!(m.target_fmr > 0.0 && m.target_fmr < 1.0))
      fail("target_fmr must be in (0,1), got ", m.target_fmr);

    m.datasets = string_list(doc, "datasets");
    m.morph_algorithms = string_list(doc, "morph_algorithms");
    m.fr_systems = string_list(doc, "fr_systems");

    if (doc.contains("scenarios")) {
      std::set<std::string> seen;
      for (const auto& s : doc.at("scenarios")) {
        const std::string label = s.get<std::string>();
        if (!seen.insert(label).second)
          fail("duplicate scenario \"", label, "\"");
        m.scenarios.push_back(ScenarioConfig::from_label(label));
      }
    } else {
      m.scenarios = vulnerability_scenario_order();
    }

    if (doc.contains("training_compositions")) {
      std::set<std::string> seen;
      for (const auto& s : doc.at("training_compositions")) {
        const std::string name = s.get<std::string>();
        if (!seen.insert(name).second)
          fail("duplicate training composition \"", name, "\"");
        m.training_compositions.push_back(
            training_composition_from_string(name));
      }
    } else {
      m.training_compositions = {TrainingComposition::Digital,
                                 TrainingComposition::PrintScan,
                                 TrainingComposition::DigitalPlusPrintScan};
    }

    std::set<std::string> vuln_keys;
    if (doc.contains("vulnerability")) {
      for (const auto& b : doc.at("vulnerability")) {
        VulnerabilityBinding binding;
        binding.dataset = b.at("dataset").get<std::string>();
        binding.algorithm = b.at("algorithm").get<std::string>();
        binding.fr_system = b.at("fr_system").get<std::string>();
        binding.scenario =
            ScenarioConfig::from_label(b.at("scenario").get<std::string>());
        binding.scores = resolve(base, b.at("scores").get<std::string>());
        binding.impostors = resolve(base, b.at("impostors").get<std::string>());
        require_member(m.datasets, binding.dataset, "dataset");
        require_member(m.morph_algorithms, binding.algorithm, "algorithm");
        require_member(m.fr_systems, binding.fr_system, "fr_system");
        require_file(binding.scores);
        require_file(binding.impostors);
        const std::string key = binding.dataset + "\x1f" + binding.algorithm +
                                "\x1f" + binding.fr_system + "\x1f" +
                                binding.scenario.label();
        if (!vuln_keys.insert(key).second)
          fail("duplicate vulnerability binding for (", binding.dataset, ", ",
               binding.algorithm, ", ", binding.fr_system, ", ",
               binding.scenario.label(), ")");
        m.vulnerability.push_back(std::move(binding));
      }
    }

    std::set<std::string> det_keys;
    if (doc.contains("detectability")) {
      for (const auto& b : doc.at("detectability")) {
        DetectabilityBinding binding;
        binding.training = training_composition_from_string(
            b.at("training").get<std::string>());
        binding.algorithm = b.at("algorithm").get<std::string>();
        binding.scenario =
            ScenarioConfig::from_label(b.at("scenario").get<std::string>());
        binding.scores = resolve(base, b.at("scores").get<std::string>());
        require_member(m.morph_algorithms, binding.algorithm, "algorithm");
        require_file(binding.scores);
        const std::string key =
            std::string(to_string(binding.training)) + "\x1f" +
            binding.algorithm + "\x1f" + binding.scenario.label();
        if (!det_keys.insert(key).second)
          fail("duplicate detectability binding for (",
               to_string(binding.training), ", ", binding.algorithm, ", ",
               binding.scenario.label(), ")");
        m.detectability.push_back(std::move(binding));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(path.string(), ": ", e.what());
  } catch (const Error& e) {
    fail(path.string(), ": ", e.what());
  }
  return m;
}

bool MetricReport::has_missing_cells() const {
  for (const VulnerabilityCell& c : vulnerability)
    if (!c.present) return true;
  for (const DetectabilityCell& c : detectability)
    if (!c.present) return true;
  return false;
}

namespace {

// Per-run cache so shared score files are parsed and hashed once.
struct FileCache {
  std::map<std::string, std::string> digests;
  std::map<std::string, MorphScoreSet> similarity;
  std::map<std::string, ImposterScoreSet> impostors;
  std::map<std::string, std::vector<ClassifierRecord>> classifier;

  const std::string& digest(const std::filesystem::path& p) {
    auto it = digests.find(p.string());
    if (it == digests.end())
      it = digests.emplace(p.string(), sha256_file_hex(p)).first;
    return it->second;
  }
};

// Scenario subset of `order` preserving the report's conventional ordering.
std::vector<ScenarioConfig> ordered_scenarios(
    const std::vector<ScenarioConfig>& order,
    const std::vector<ScenarioConfig>& selected) {
  std::vector<ScenarioConfig> out;
  for (const ScenarioConfig& s : order)
    if (std::find(selected.begin(), selected.end(), s) != selected.end())
      out.push_back(s);
  return out;
}

void fill_vulnerability(const EvaluationManifest& manifest,
                        MetricReport& report, FileCache& cache) {
  const auto scenarios =
      ordered_scenarios(vulnerability_scenario_order(), manifest.scenarios);
  for (const std::string& alg : manifest.morph_algorithms) {
    for (const std::string& ds : manifest.datasets) {
      for (const std::string& fr : manifest.fr_systems) {
        for (const ScenarioConfig& sc : scenarios) {
          VulnerabilityCell cell;
          cell.algorithm = alg;
          cell.dataset = ds;
          cell.fr_system = fr;
          cell.scenario = sc.label();

          const VulnerabilityBinding* binding = nullptr;
          for (const VulnerabilityBinding& b : manifest.vulnerability) {
            if (b.algorithm == alg && b.dataset == ds && b.fr_system == fr &&
                b.scenario == sc) {
              binding = &b;
              break;
            }
          }
          if (!binding) {
            cell.note = "no binding";
            report.vulnerability.push_back(std::move(cell));
            continue;
          }
          cell.scores_path = binding->scores.string();
          cell.impostors_path = binding->impostors.string();
          try {
            auto sim = cache.similarity.find(cell.scores_path);
            if (sim == cache.similarity.end())
              sim = cache.similarity
                        .emplace(cell.scores_path,
                                 load_similarity_scores(binding->scores))
                        .first;
            auto imp = cache.impostors.find(cell.impostors_path);
            if (imp == cache.impostors.end())
              imp = cache.impostors
                        .emplace(cell.impostors_path,
                                 load_impostor_scores(binding->impostors))
                        .first;
            cell.calibration =
                calibrate_threshold(imp->second, manifest.target_fmr);
            cell.prodavg_mmpmr_pct =
                100.0 * prodavg_mmpmr(sim->second, cell.calibration.delta);
            cell.scores_sha256 = cache.digest(binding->scores);
            cell.impostors_sha256 = cache.digest(binding->impostors);
            cell.present = true;
          } catch (const Error& e) {
            cell.present = false;
            cell.note = e.what();
          }
          report.vulnerability.push_back(std::move(cell));
        }
      }
    }
  }
}

void fill_detectability(const EvaluationManifest& manifest,
                        MetricReport& report, FileCache& cache) {
  const auto scenarios =
      ordered_scenarios(detectability_scenario_order(), manifest.scenarios);
  for (const TrainingComposition training : manifest.training_compositions) {
    for (const std::string& alg : manifest.morph_algorithms) {
      for (const ScenarioConfig& sc : scenarios) {
        DetectabilityCell cell;
        cell.training = std::string(to_string(training));
        cell.algorithm = alg;
        cell.scenario = sc.label();

        const DetectabilityBinding* binding = nullptr;
        for (const DetectabilityBinding& b : manifest.detectability) {
          if (b.training == training && b.algorithm == alg &&
              b.scenario == sc) {
            binding = &b;
            break;
          }
        }
        if (!binding) {
          cell.note = "no binding";
          report.detectability.push_back(std::move(cell));
          continue;
        }
        cell.scores_path = binding->scores.string();
        try {
          auto rec = cache.classifier.find(cell.scores_path);
          if (rec == cache.classifier.end())
            rec = cache.classifier
                      .emplace(cell.scores_path,
                               load_classifier_scores(binding->scores))
                      .first;
          const DetectorOperatingReport op =
              macer_at_bpcer(rec->second, kReportBpcerTargets);
          cell.eer_pct = 100.0 * op.eer;
          for (std::size_t i = 0; i < kReportBpcerTargets.size(); ++i)
            cell.macer_pct[i] =
                100.0 * op.macer_at_bpcer.at(kReportBpcerTargets[i]);
          cell.scores_sha256 = cache.digest(binding->scores);
          cell.present = true;
        } catch (const Error& e) {
          cell.present = false;
          cell.note = e.what();
        }
        report.detectability.push_back(std::move(cell));
      }
    }
  }
}

MetricReport make_report(const EvaluationManifest& manifest) {
  MetricReport report;
  report.toolkit_version = kVersion;
  report.target_fmr = manifest.target_fmr;
  return report;
}

}  // namespace

MetricReport run_vulnerability_study(const EvaluationManifest& manifest) {
  MetricReport report = make_report(manifest);
  FileCache cache;
  fill_vulnerability(manifest, report, cache);
  return report;
}

MetricReport run_detectability_study(const EvaluationManifest& manifest) {
  MetricReport report = make_report(manifest);
  FileCache cache;
  fill_detectability(manifest, report, cache);
  return report;
}

MetricReport run_studies(const EvaluationManifest& manifest) {
  MetricReport report = make_report(manifest);
  FileCache cache;
  fill_vulnerability(manifest, report, cache);
  fill_detectability(manifest, report, cache);
  return report;
}

}  // namespace morpheval

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "morpheval/error.hpp"
#include "morpheval/harness.hpp"

namespace morpheval {

namespace {

// Two decimal places, half-even ties (llrint under the default rounding mode).
std::string fixed2(double v) {
  const bool neg = v < 0;
  const long long cents = std::llrint(std::abs(v) * 100.0);
  std::string out = neg && cents != 0 ? "-" : "";
  out += std::to_string(cents / 100);
  out += '.';
  const long long frac = cents % 100;
  out += static_cast<char>('0' + frac / 10);
  out += static_cast<char>('0' + frac % 10);
  return out;
}

// Shortest round-trip representation.
std::string full(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string csv_render(const MetricReport& r) {
  std::ostringstream out;
  out << "# toolkit_version," << r.toolkit_version << '\n';
  out << "# target_fmr," << full(r.target_fmr) << '\n';
  out << "table,algorithm,dataset,fr_system,training,scenario,"
         "prodavg_mmpmr_pct,eer_pct,macer_bpcer_0.1_pct,macer_bpcer_1_pct,"
         "macer_bpcer_5_pct,delta,achieved_fmr,scores_sha256,"
         "impostors_sha256,status\n";
  for (const VulnerabilityCell& c : r.vulnerability) {
    out << "vulnerability," << c.algorithm << ',' << c.dataset << ','
        << c.fr_system << ",," << c.scenario << ',';
    if (c.present)
      out << fixed2(c.prodavg_mmpmr_pct) << ",,,,," << full(c.calibration.delta)
          << ',' << full(c.calibration.achieved_fmr) << ',' << c.scores_sha256
          << ',' << c.impostors_sha256 << ",ok\n";
    else
      out << ",,,,,,,,,absent\n";
  }
  for (const DetectabilityCell& c : r.detectability) {
    out << "detectability," << c.algorithm << ",,," << c.training << ','
        << c.scenario << ',';
    if (c.present)
      out << ',' << fixed2(c.eer_pct) << ',' << fixed2(c.macer_pct[0]) << ','
          << fixed2(c.macer_pct[1]) << ',' << fixed2(c.macer_pct[2]) << ",,,"
          << c.scores_sha256 << ",,ok\n";
    else
      out << ",,,,,,,,,absent\n";
  }
  return out.str();
}

// One markdown cell: the 2dp value, bolded when it attains the column max.
std::string md_cell(bool present, double value, bool is_max) {
  if (!present) return "-";
  const std::string text = fixed2(value);
  return is_max ? "**" + text + "**" : text;
}

struct ColumnMax {
  // Value range over present cells per (block, column) pair. Bold marks the
  // column maximum, but only where it discriminates: a column whose values
  // all tie (e.g. an all-zero perfect-detection block) stays plain.
  std::map<std::pair<std::string, int>, std::pair<double, double>> range;

  void feed(const std::string& block, int col, bool present, double v) {
    if (!present) return;
    auto [it, inserted] =
        range.emplace(std::make_pair(block, col), std::make_pair(v, v));
    if (!inserted) {
      it->second.first = std::min(it->second.first, v);
      it->second.second = std::max(it->second.second, v);
    }
  }
  bool is_max(const std::string& block, int col, bool present,
              double v) const {
    if (!present) return false;
    const auto it = range.find(std::make_pair(block, col));
    return it != range.end() && it->second.second > it->second.first &&
           v == it->second.second;
  }
};

std::string markdown_render(const MetricReport& r) {
  std::ostringstream out;
  out << "# Morph evaluation report\n\n";
  out << "toolkit version " << r.toolkit_version << ", target FMR "
      << fixed2(r.target_fmr * 100.0) << "%\n";

  // Vulnerability: rows algorithm x scenario, columns dataset x FR system.
  if (!r.vulnerability.empty()) {
    std::vector<std::string> algorithms, scenarios;
    std::vector<std::pair<std::string, std::string>> columns;
    for (const VulnerabilityCell& c : r.vulnerability) {
      if (std::find(algorithms.begin(), algorithms.end(), c.algorithm) ==
          algorithms.end())
        algorithms.push_back(c.algorithm);
      if (std::find(scenarios.begin(), scenarios.end(), c.scenario) ==
          scenarios.end())
        scenarios.push_back(c.scenario);
      const auto col = std::make_pair(c.dataset, c.fr_system);
      if (std::find(columns.begin(), columns.end(), col) == columns.end())
        columns.push_back(col);
    }
    auto find_cell = [&](const std::string& alg, const std::string& sc,
                         const std::pair<std::string, std::string>& col)
        -> const VulnerabilityCell* {
      for (const VulnerabilityCell& c : r.vulnerability)
        if (c.algorithm == alg && c.scenario == sc && c.dataset == col.first &&
            c.fr_system == col.second)
          return &c;
      return nullptr;
    };

    ColumnMax maxima;
    for (const VulnerabilityCell& c : r.vulnerability) {
      const auto col = std::make_pair(c.dataset, c.fr_system);
      const int col_id = static_cast<int>(
          std::find(columns.begin(), columns.end(), col) - columns.begin());
      maxima.feed(c.algorithm, col_id, c.present, c.prodavg_mmpmr_pct);
    }

    out << "\n## Vulnerability (ProdAvg-MMPMR %)\n\n";
    out << "| Morph | Scenario |";
    for (const auto& [ds, fr] : columns) out << ' ' << ds << ' ' << fr << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out << "---|";
    out << '\n';
    for (const std::string& alg : algorithms) {
      for (const std::string& sc : scenarios) {
        out << "| " << alg << " | " << sc << " |";
        for (std::size_t i = 0; i < columns.size(); ++i) {
          const VulnerabilityCell* c = find_cell(alg, sc, columns[i]);
          const bool present = c && c->present;
          const double v = present ? c->prodavg_mmpmr_pct : 0.0;
          out << ' '
              << md_cell(present, v,
                         maxima.is_max(alg, static_cast<int>(i), present, v))
              << " |";
        }
        out << '\n';
      }
    }
  }

  // Detectability: rows algorithm x scenario, column groups per training
  // composition with EER and the three MACER operating points.
  if (!r.detectability.empty()) {
    std::vector<std::string> algorithms, scenarios, trainings;
    for (const DetectabilityCell& c : r.detectability) {
      if (std::find(algorithms.begin(), algorithms.end(), c.algorithm) ==
          algorithms.end())
        algorithms.push_back(c.algorithm);
      if (std::find(scenarios.begin(), scenarios.end(), c.scenario) ==
          scenarios.end())
        scenarios.push_back(c.scenario);
      if (std::find(trainings.begin(), trainings.end(), c.training) ==
          trainings.end())
        trainings.push_back(c.training);
    }
    auto find_cell = [&](const std::string& tr, const std::string& alg,
                         const std::string& sc) -> const DetectabilityCell* {
      for (const DetectabilityCell& c : r.detectability)
        if (c.training == tr && c.algorithm == alg && c.scenario == sc)
          return &c;
      return nullptr;
    };
    auto cell_value = [](const DetectabilityCell& c, int metric) {
      return metric == 0 ? c.eer_pct : c.macer_pct[metric - 1];
    };

    ColumnMax maxima;
    for (const DetectabilityCell& c : r.detectability) {
      const int tr_id = static_cast<int>(
          std::find(trainings.begin(), trainings.end(), c.training) -
          trainings.begin());
      for (int metric = 0; metric < 4; ++metric)
        maxima.feed(c.algorithm, tr_id * 4 + metric, c.present,
                    cell_value(c, metric));
    }

    static const char* metric_names[4] = {"EER", "M@0.1%", "M@1%", "M@5%"};
    out << "\n## Detectability (EER % and MACER % at BPCER)\n\n";
    out << "| Morph | Scenario |";
    for (const std::string& tr : trainings)
      for (const char* name : metric_names) out << ' ' << tr << ' ' << name << " |";
    out << "\n|---|---|";
    for (std::size_t i = 0; i < trainings.size() * 4; ++i) out << "---|";
    out << '\n';
    for (const std::string& alg : algorithms) {
      for (const std::string& sc : scenarios) {
        out << "| " << alg << " | " << sc << " |";
        for (std::size_t t = 0; t < trainings.size(); ++t) {
          const DetectabilityCell* c = find_cell(trainings[t], alg, sc);
          const bool present = c && c->present;
          for (int metric = 0; metric < 4; ++metric) {
            const double v = present ? cell_value(*c, metric) : 0.0;
            const int col = static_cast<int>(t) * 4 + metric;
            out << ' ' << md_cell(present, v, maxima.is_max(alg, col, present, v))
                << " |";
          }
        }
        out << '\n';
      }
    }
  }

  // Provenance: every input file digest plus the calibration each cell used.
  out << "\n## Provenance\n\n";
  std::vector<std::pair<std::string, std::string>> files;
  auto add_file = [&](const std::string& path, const std::string& digest) {
    if (path.empty() || digest.empty()) return;
    const auto entry = std::make_pair(path, digest);
    if (std::find(files.begin(), files.end(), entry) == files.end())
      files.push_back(entry);
  };
  for (const VulnerabilityCell& c : r.vulnerability) {
    add_file(c.scores_path, c.scores_sha256);
    add_file(c.impostors_path, c.impostors_sha256);
  }
  for (const DetectabilityCell& c : r.detectability)
    add_file(c.scores_path, c.scores_sha256);
  for (const auto& [path, digest] : files)
    out << "- `" << path << "` sha256 `" << digest << "`\n";
  bool any_calibration = false;
  for (const VulnerabilityCell& c : r.vulnerability) {
    if (!c.present) continue;
    if (!any_calibration) {
      out << "\nCalibrations (delta at target FMR, achieved FMR):\n\n";
      any_calibration = true;
    }
    out << "- " << c.algorithm << '/' << c.dataset << '/' << c.fr_system << '/'
        << c.scenario << ": delta " << full(c.calibration.delta)
        << ", achieved " << full(c.calibration.achieved_fmr) << '\n';
  }
  return out.str();
}

std::string json_render(const MetricReport& r) {
  nlohmann::ordered_json doc;
  doc["toolkit_version"] = r.toolkit_version;
  doc["target_fmr"] = r.target_fmr;

  doc["vulnerability"] = nlohmann::ordered_json::array();
  for (const VulnerabilityCell& c : r.vulnerability) {
    nlohmann::ordered_json cell;
    cell["algorithm"] = c.algorithm;
    cell["dataset"] = c.dataset;
    cell["fr_system"] = c.fr_system;
    cell["scenario"] = c.scenario;
    cell["status"] = c.present ? "ok" : "absent";
    if (c.present) {
      cell["prodavg_mmpmr_pct"] = c.prodavg_mmpmr_pct;
      cell["calibration"] = {{"delta", c.calibration.delta},
                             {"target_fmr", c.calibration.target_fmr},
                             {"achieved_fmr", c.calibration.achieved_fmr}};
      cell["scores"] = {{"path", c.scores_path}, {"sha256", c.scores_sha256}};
      cell["impostors"] = {{"path", c.impostors_path},
                           {"sha256", c.impostors_sha256}};
    } else {
      cell["note"] = c.note;
    }
    doc["vulnerability"].push_back(std::move(cell));
  }

  doc["detectability"] = nlohmann::ordered_json::array();
  for (const DetectabilityCell& c : r.detectability) {
    nlohmann::ordered_json cell;
    cell["training"] = c.training;
    cell["algorithm"] = c.algorithm;
    cell["scenario"] = c.scenario;
    cell["status"] = c.present ? "ok" : "absent";
    if (c.present) {
      cell["eer_pct"] = c.eer_pct;
      cell["macer_at_bpcer_pct"] = {{"0.1%", c.macer_pct[0]},
                                    {"1%", c.macer_pct[1]},
                                    {"5%", c.macer_pct[2]}};
      cell["scores"] = {{"path", c.scores_path}, {"sha256", c.scores_sha256}};
    } else {
      cell["note"] = c.note;
    }
    doc["detectability"].push_back(std::move(cell));
  }
  return doc.dump(2) + "\n";
}

}  // namespace

std::string render_report(const MetricReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv:
      return csv_render(report);
    case ReportFormat::Markdown:
      return markdown_render(report);
    case ReportFormat::Json:
      return json_render(report);
  }
  fail("invalid report format");
}

}  // namespace morpheval

#include "morpheval/loaders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "morpheval/error.hpp"

namespace morpheval {

namespace {

enum class ScoreDirection { Ascending, Descending };

struct CsvReader {
  std::ifstream in;
  std::string path;
  std::size_t line_no = 0;
  ScoreDirection direction = ScoreDirection::Ascending;

  explicit CsvReader(const std::filesystem::path& p) : path(p.string()) {
    in.open(p);
    if (!in) fail("cannot open ", path);
  }

  [[noreturn]] void fail_here(const std::string& what) const {
    fail(path, ":", line_no, ": ", what);
  }

  // Reads pragma lines ("# key: value") and the header; verifies the header
  // matches `expected` exactly.
  void read_header(const std::string& expected) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        parse_pragma(line);
        continue;
      }
      if (line != expected)
        fail_here("expected header \"" + expected + "\", got \"" + line +
                  "\"");
      return;
    }
    fail(path, ": no records (empty file)");
  }

  void parse_pragma(const std::string& line) {
    std::string body = line.substr(1);
    const auto colon = body.find(':');
    if (colon == std::string::npos)
      fail_here("malformed pragma \"" + line + "\"");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(body.substr(0, colon));
    const std::string value = trim(body.substr(colon + 1));
    if (key == "score_direction") {
      if (value == "asc")
        direction = ScoreDirection::Ascending;
      else if (value == "desc")
        direction = ScoreDirection::Descending;
      else
        fail_here("score_direction must be \"asc\" or \"desc\", got \"" +
                  value + "\"");
    } else {
      fail_here("unknown pragma \"" + key + "\"");
    }
  }

  // Next data row split on commas; false at EOF. Blank lines are skipped.
  bool next_row(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields.clear();
      std::size_t start = 0;
      while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
          fields.push_back(line.substr(start));
          break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
      }
      return true;
    }
    return false;
  }

  double parse_score(const std::string& field) const {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
      fail_here("cannot parse score \"" + field + "\"");
    if (!std::isfinite(value)) fail_here("non-finite score \"" + field + "\"");
    return direction == ScoreDirection::Ascending ? value : -value;
  }

  int parse_int(const std::string& field, const char* what) const {
    int value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
      fail_here(std::string("cannot parse ") + what + " \"" + field + "\"");
    return value;
  }
};

void require_fields(const CsvReader& reader,
                    const std::vector<std::string>& fields, std::size_t n) {
  if (fields.size() != n)
    reader.fail_here("expected " + std::to_string(n) + " fields, got " +
                     std::to_string(fields.size()));
}

std::string format_score(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

MorphScoreSet load_similarity_scores(const std::filesystem::path& path) {
  CsvReader reader(path);
  reader.read_header("morph_id,subject_index,sample_index,score");

  std::vector<SimilarityRecord> records;
  std::vector<std::string> fields;
  while (reader.next_row(fields)) {
    require_fields(reader, fields, 4);
    SimilarityRecord r;
    r.morph_id = fields[0];
    if (r.morph_id.empty()) reader.fail_here("empty morph_id");
    r.subject_index = reader.parse_int(fields[1], "subject_index");
    r.sample_index = reader.parse_int(fields[2], "sample_index");
    r.score = reader.parse_score(fields[3]);
    records.push_back(std::move(r));
  }
  if (records.empty()) fail(path.string(), ": no records");
  try {
    return MorphScoreSet::from_records(std::move(records));
  } catch (const Error& e) {
    fail(path.string(), ": ", e.what());
  }
}

void write_similarity_scores(const MorphScoreSet& set,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open ", path.string(), " for writing");
  out << "morph_id,subject_index,sample_index,score\n";
  for (const SimilarityRecord& r : set.to_records())
    out << r.morph_id << ',' << r.subject_index << ',' << r.sample_index << ','
        << format_score(r.score) << '\n';
  if (!out) fail("failed writing ", path.string());
}

std::vector<ClassifierRecord> load_classifier_scores(
    const std::filesystem::path& path) {
  CsvReader reader(path);
  reader.read_header("image_id,label,score,algorithm,provenance");

  std::vector<ClassifierRecord> records;
  std::set<std::string> seen_ids;
  std::vector<std::string> fields;
  while (reader.next_row(fields)) {
    require_fields(reader, fields, 5);
    ClassifierRecord r;
    r.image_id = fields[0];
    if (r.image_id.empty()) reader.fail_here("empty image_id");
    if (!seen_ids.insert(r.image_id).second)
      reader.fail_here("duplicate image_id \"" + r.image_id + "\"");
    try {
      r.label = image_label_from_string(fields[1]);
      r.provenance = provenance_from_string(fields[4]);
    } catch (const Error& e) {
      reader.fail_here(e.what());
    }
    r.detection_score = reader.parse_score(fields[2]);
    if (!fields[3].empty()) r.morph_algorithm = fields[3];
    records.push_back(std::move(r));
  }
  if (records.empty()) fail(path.string(), ": no records");
  return records;
}

void write_classifier_scores(std::span<const ClassifierRecord> records,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open ", path.string(), " for writing");
  out << "image_id,label,score,algorithm,provenance\n";
  for (const ClassifierRecord& r : records)
    out << r.image_id << ',' << to_string(r.label) << ','
        << format_score(r.detection_score) << ','
        << (r.morph_algorithm ? *r.morph_algorithm : "") << ','
        << to_string(r.provenance) << '\n';
  if (!out) fail("failed writing ", path.string());
}

ImposterScoreSet load_impostor_scores(const std::filesystem::path& path) {
  CsvReader reader(path);
  reader.read_header("score");

  ImposterScoreSet set;
  std::vector<std::string> fields;
  while (reader.next_row(fields)) {
    require_fields(reader, fields, 1);
    set.scores.push_back(reader.parse_score(fields[0]));
  }
  if (set.scores.empty()) fail(path.string(), ": no records");
  return set;
}

void write_impostor_scores(const ImposterScoreSet& set,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open ", path.string(), " for writing");
  out << "score\n";
  for (double s : set.scores) out << format_score(s) << '\n';
  if (!out) fail("failed writing ", path.string());
}

LandmarkSet load_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open ", path.string());

  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(path.string(), ": invalid JSON: ", e.what());
  }

  LandmarkSet set;
  try {
    set.image_width = doc.at("width").get<int>();
    set.image_height = doc.at("height").get<int>();
    const auto& points = doc.at("points");
    if (!points.is_array())
      fail(path.string(), ": \"points\" must be an array");
    for (const auto& p : points) {
      if (!p.is_array() || p.size() != 2)
        fail(path.string(), ": each point must be an [x, y] pair");
      set.points.push_back(Point{p[0].get<double>(), p[1].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(path.string(), ": ", e.what());
  }

  try {
    set.validate();
  } catch (const Error& e) {
    fail(path.string(), ": ", e.what());
  }
  return set;
}

}  // namespace morpheval

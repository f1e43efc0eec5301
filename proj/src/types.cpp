#include "morpheval/types.hpp"

#include <algorithm>
#include <cmath>

#include "morpheval/error.hpp"

namespace morpheval {

std::string_view to_string(MediaProvenance p) {
  return p == MediaProvenance::Digital ? "digital" : "print-scanned";
}

MediaProvenance provenance_from_string(std::string_view s) {
  if (s == "digital") return MediaProvenance::Digital;
  if (s == "print-scanned") return MediaProvenance::PrintScanned;
  fail("unknown provenance \"", std::string(s),
       "\" (expected \"digital\" or \"print-scanned\")");
}

std::string ScenarioConfig::label() const {
  std::string out;
  out += morph_source == MediaProvenance::Digital ? "D" : "PS";
  out += "-";
  out += bona_fide_source == MediaProvenance::Digital ? "D" : "PS";
  return out;
}

ScenarioConfig ScenarioConfig::from_label(std::string_view label) {
  ScenarioConfig cfg;
  if (label == "D-D") {
    cfg = {MediaProvenance::Digital, MediaProvenance::Digital};
  } else if (label == "D-PS") {
    cfg = {MediaProvenance::Digital, MediaProvenance::PrintScanned};
  } else if (label == "PS-D") {
    cfg = {MediaProvenance::PrintScanned, MediaProvenance::Digital};
  } else if (label == "PS-PS") {
    cfg = {MediaProvenance::PrintScanned, MediaProvenance::PrintScanned};
  } else {
    fail("unknown scenario \"", std::string(label),
         "\" (expected D-D, D-PS, PS-D or PS-PS)");
  }
  return cfg;
}

std::vector<ScenarioConfig> vulnerability_scenario_order() {
  return {ScenarioConfig::from_label("D-D"), ScenarioConfig::from_label("D-PS"),
          ScenarioConfig::from_label("PS-D"),
          ScenarioConfig::from_label("PS-PS")};
}

std::vector<ScenarioConfig> detectability_scenario_order() {
  return {ScenarioConfig::from_label("D-D"), ScenarioConfig::from_label("PS-D"),
          ScenarioConfig::from_label("D-PS"),
          ScenarioConfig::from_label("PS-PS")};
}

MorphScoreSet MorphScoreSet::from_records(
    std::vector<SimilarityRecord> records) {
  if (records.empty()) fail("no records: a morph score set cannot be empty");

  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.morph_id != b.morph_id) return a.morph_id < b.morph_id;
    if (a.subject_index != b.subject_index)
      return a.subject_index < b.subject_index;
    return a.sample_index < b.sample_index;
  });

  MorphScoreSet set;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const SimilarityRecord& r = records[i];
    if (!std::isfinite(r.score))
      fail("non-finite score for morph \"", r.morph_id, "\" subject ",
           r.subject_index, " sample ", r.sample_index);
    if (r.subject_index < 1)
      fail("subject_index must be >= 1 (morph \"", r.morph_id, "\")");
    if (r.sample_index < 1)
      fail("sample_index must be >= 1 (morph \"", r.morph_id, "\")");
    if (i > 0) {
      const SimilarityRecord& p = records[i - 1];
      if (p.morph_id == r.morph_id && p.subject_index == r.subject_index &&
          p.sample_index == r.sample_index)
        fail("duplicate record (", r.morph_id, ", ", r.subject_index, ", ",
             r.sample_index, ")");
    }

    if (set.morphs_.empty() || set.morphs_.back().id != r.morph_id)
      set.morphs_.push_back(Morph{r.morph_id, {}});
    Morph& morph = set.morphs_.back();

    if (r.subject_index == static_cast<int>(morph.subjects.size()) + 1)
      morph.subjects.emplace_back();
    else if (r.subject_index != static_cast<int>(morph.subjects.size()))
      fail("subject indices for morph \"", r.morph_id,
           "\" are not contiguous from 1");
    Subject& subject = morph.subjects[r.subject_index - 1];

    if (r.sample_index != static_cast<int>(subject.sample_scores.size()) + 1)
      fail("sample indices for morph \"", r.morph_id, "\" subject ",
           r.subject_index, " are not contiguous from 1");
    subject.sample_scores.push_back(r.score);
  }
  return set;
}

bool MorphScoreSet::single_sample_per_subject() const {
  for (const Morph& m : morphs_)
    for (const Subject& s : m.subjects)
      if (s.sample_scores.size() != 1) return false;
  return true;
}

std::size_t MorphScoreSet::record_count() const {
  std::size_t n = 0;
  for (const Morph& m : morphs_)
    for (const Subject& s : m.subjects) n += s.sample_scores.size();
  return n;
}

std::vector<SimilarityRecord> MorphScoreSet::to_records() const {
  std::vector<SimilarityRecord> out;
  out.reserve(record_count());
  for (const Morph& m : morphs_)
    for (std::size_t n = 0; n < m.subjects.size(); ++n)
      for (std::size_t i = 0; i < m.subjects[n].sample_scores.size(); ++i)
        out.push_back(SimilarityRecord{m.id, static_cast<int>(n) + 1,
                                       static_cast<int>(i) + 1,
                                       m.subjects[n].sample_scores[i]});
  return out;
}

std::string_view to_string(ImageLabel label) {
  return label == ImageLabel::BonaFide ? "bonafide" : "morph";
}

ImageLabel image_label_from_string(std::string_view s) {
  if (s == "bonafide") return ImageLabel::BonaFide;
  if (s == "morph") return ImageLabel::Morph;
  fail("unknown label \"", std::string(s),
       "\" (expected \"bonafide\" or \"morph\")");
}

void LandmarkSet::validate() const {
  if (image_width <= 0 || image_height <= 0)
    fail("landmark set has non-positive image dimensions");
  if (static_cast<int>(points.size()) != kLandmarkCount)
    fail("expected ", kLandmarkCount, " points, got ", points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail("landmark ", i, " is not finite");
    if (p.x < 0.0 || p.x >= image_width || p.y < 0.0 || p.y >= image_height)
      fail("landmark ", i, " (", p.x, ", ", p.y, ") out of bounds [0, ",
           image_width, ") x [0, ", image_height, ")");
  }
}

}  // namespace morpheval

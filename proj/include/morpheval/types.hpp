#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace morpheval {

// Whether an image (or anything derived from it) came straight from a digital
// source or went through a print-scan cycle.
enum class MediaProvenance { Digital, PrintScanned };

std::string_view to_string(MediaProvenance p);
MediaProvenance provenance_from_string(std::string_view s);

// Provenance pairing of (morph, bona fide) under evaluation. The four
// combinations carry the short labels D-D, D-PS, PS-D and PS-PS, morph first.
struct ScenarioConfig {
  MediaProvenance morph_source = MediaProvenance::Digital;
  MediaProvenance bona_fide_source = MediaProvenance::Digital;

  std::string label() const;
  static ScenarioConfig from_label(std::string_view label);

  bool operator==(const ScenarioConfig&) const = default;
};

// Scenario row order used by vulnerability reports: D-D, D-PS, PS-D, PS-PS.
std::vector<ScenarioConfig> vulnerability_scenario_order();
// Detectability reports conventionally use D-D, PS-D, D-PS, PS-PS instead.
std::vector<ScenarioConfig> detectability_scenario_order();

// One face-recognition similarity comparison: probe sample i of contributing
// subject n against morph m. Higher score = more similar.
struct SimilarityRecord {
  std::string morph_id;
  int subject_index = 0;  // 1-based
  int sample_index = 0;   // 1-based
  double score = 0.0;

  bool operator==(const SimilarityRecord&) const = default;
};

// Similarity scores grouped per morph / per contributing subject / per probe
// sample. Construction validates the whole structure: finite scores, unique
// (morph, subject, sample) keys, subject and sample indices contiguous from 1.
class MorphScoreSet {
 public:
  struct Subject {
    // sample_scores[i] is the score of sample index i+1.
    std::vector<double> sample_scores;

    bool operator==(const Subject&) const = default;
  };
  struct Morph {
    std::string id;
    // subjects[n] describes subject index n+1.
    std::vector<Subject> subjects;

    bool operator==(const Morph&) const = default;
  };

  static MorphScoreSet from_records(std::vector<SimilarityRecord> records);

  const std::vector<Morph>& morphs() const { return morphs_; }
  int morph_count() const { return static_cast<int>(morphs_.size()); }
  bool single_sample_per_subject() const;
  std::size_t record_count() const;

  // Flattened back out, sorted by (morph_id, subject_index, sample_index).
  std::vector<SimilarityRecord> to_records() const;

  bool operator==(const MorphScoreSet&) const = default;

 private:
  std::vector<Morph> morphs_;  // sorted by id
};

// Similarity scores of non-mated comparisons; defines the FMR operating point.
struct ImposterScoreSet {
  std::vector<double> scores;
};

enum class ImageLabel { BonaFide, Morph };

std::string_view to_string(ImageLabel label);
ImageLabel image_label_from_string(std::string_view s);

// One morph-detector output: higher detection_score = more morph-like.
struct ClassifierRecord {
  std::string image_id;
  ImageLabel label = ImageLabel::BonaFide;
  double detection_score = 0.0;
  std::optional<std::string> morph_algorithm;
  MediaProvenance provenance = MediaProvenance::Digital;

  bool operator==(const ClassifierRecord&) const = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

inline constexpr int kLandmarkCount = 68;

// 68 named face landmark points for one image, in pixel coordinates.
// Every point must lie inside [0, width) x [0, height).
struct LandmarkSet {
  std::vector<Point> points;
  int image_width = 0;
  int image_height = 0;

  void validate() const;  // throws Error on violation

  bool operator==(const LandmarkSet&) const = default;
};

}  // namespace morpheval

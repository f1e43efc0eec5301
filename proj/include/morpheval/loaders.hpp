#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "morpheval/types.hpp"

namespace morpheval {

// Similarity CSV: header "morph_id,subject_index,sample_index,score".
// An optional pragma line "# score_direction: asc|desc" may precede the
// header; "desc" (lower = more similar) negates scores on load so the
// in-memory direction is always higher = more similar.
MorphScoreSet load_similarity_scores(const std::filesystem::path& path);
void write_similarity_scores(const MorphScoreSet& set,
                             const std::filesystem::path& path);

// Classifier CSV: header "image_id,label,score,algorithm,provenance" with
// label in {bonafide,morph} and provenance in {digital,print-scanned}.
// The algorithm field may be empty. Same score_direction pragma as above
// ("desc" = lower means more morph-like).
std::vector<ClassifierRecord> load_classifier_scores(
    const std::filesystem::path& path);
void write_classifier_scores(std::span<const ClassifierRecord> records,
                             const std::filesystem::path& path);

// Impostor CSV: header "score", one non-mated similarity score per line.
ImposterScoreSet load_impostor_scores(const std::filesystem::path& path);
void write_impostor_scores(const ImposterScoreSet& set,
                           const std::filesystem::path& path);

// Landmark JSON: {"width": W, "height": H, "points": [[x, y] x 68]}.
LandmarkSet load_landmarks(const std::filesystem::path& path);

}  // namespace morpheval

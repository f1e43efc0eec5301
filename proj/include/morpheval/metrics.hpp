#pragma once

#include <map>
#include <span>
#include <vector>

#include "morpheval/types.hpp"

namespace morpheval {

// Verification threshold calibrated against an impostor distribution.
struct ThresholdCalibration {
  double delta = 0.0;        // always one of the observed impostor scores
  double target_fmr = 0.0;   // requested operating point, in (0,1)
  double achieved_fmr = 0.0; // exact fraction of impostor scores > delta
};

// Returns the smallest observed impostor score delta such that the fraction
// of impostor scores strictly greater than delta is <= target_fmr. No
// interpolation: the threshold is always an observed operating point.
ThresholdCalibration calibrate_threshold(const ImposterScoreSet& impostors,
                                         double target_fmr);

// Mated morph presentation match rate: fraction of morphs whose minimum
// subject similarity exceeds delta. Requires exactly one sample per
// (morph, subject); use prodavg_mmpmr for multi-sample sets.
double mmpmr(const MorphScoreSet& scores, double delta);

// Product-of-averages MMPMR: per subject, the fraction of samples above
// delta; multiplied across subjects; averaged across morphs. Reduces exactly
// to mmpmr when every subject has a single sample.
double prodavg_mmpmr(const MorphScoreSet& scores, double delta);

// Detector operating point at a given decision threshold t (classify as
// morph iff detection_score >= t):
//   false_accept_rate = fraction of bona fides with score >= t  (BPCER)
//   false_reject_rate = fraction of morphs with score < t       (MACER)
struct RocPoint {
  double threshold = 0.0;
  double false_accept_rate = 0.0;
  double false_reject_rate = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // thresholds ascending, ending at +infinity
};

// Operating points at every distinct observed score plus +infinity; rates by
// exact counting. Requires at least one record of each label.
RocCurve compute_roc(std::span<const ClassifierRecord> records);

// Rate at the FAR/FRR crossing, linearly interpolated between adjacent
// operating points when no exact crossing exists.
double equal_error_rate(std::span<const ClassifierRecord> records);

// How the decision threshold is picked for a BPCER target. The default takes
// the operating point with the largest BPCER not exceeding the target; the
// alternative takes the smallest BPCER at or above it (sensitivity analysis).
// When several thresholds share the selected BPCER value, LargestNotAbove
// resolves to the smallest of them and SmallestNotBelow to the largest.
enum class BpcerThresholdRule { LargestNotAbove, SmallestNotBelow };

struct DetectorOperatingReport {
  double eer = 0.0;
  // target BPCER -> MACER at the selected threshold, keyed by target.
  std::map<double, double> macer_at_bpcer;
};

inline constexpr double kDefaultBpcerTargets[] = {0.001, 0.01, 0.05};

DetectorOperatingReport macer_at_bpcer(
    std::span<const ClassifierRecord> records,
    std::span<const double> bpcer_targets = kDefaultBpcerTargets,
    BpcerThresholdRule rule = BpcerThresholdRule::LargestNotAbove);

// Exponential-moving-average decay scaled with batch size:
// (1/2)^(batch_size / 1000).
double ema_decay(int batch_size);

}  // namespace morpheval

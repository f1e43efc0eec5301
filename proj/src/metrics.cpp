#include "morpheval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "morpheval/error.hpp"

namespace morpheval {

ThresholdCalibration calibrate_threshold(const ImposterScoreSet& impostors,
                                         double target_fmr) {
  if (impostors.scores.empty()) fail("empty impostor set");
  if (!(target_fmr > 0.0 && target_fmr < 1.0))
    fail("target FMR must be in (0,1), got ", target_fmr);
  for (double s : impostors.scores)
    if (!std::isfinite(s)) fail("non-finite impostor score");

  std::vector<double> sorted = impostors.scores;
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  // Candidates ascend, so the first score whose strictly-above fraction fits
  // the target is the minimal threshold. The maximum always qualifies.
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    const auto above = sorted.end() -
                       std::upper_bound(sorted.begin(), sorted.end(), sorted[i]);
    const double fmr = static_cast<double>(above) / n;
    if (fmr <= target_fmr)
      return ThresholdCalibration{sorted[i], target_fmr, fmr};
  }
  fail("calibration failed");  // unreachable: max score achieves FMR 0
}

double mmpmr(const MorphScoreSet& scores, double delta) {
  if (scores.morph_count() == 0) fail("empty score set");
  if (!scores.single_sample_per_subject())
    fail("mmpmr requires a single sample per subject; use prodavg_mmpmr for "
         "multi-sample sets");
  double matched = 0.0;
  for (const MorphScoreSet::Morph& m : scores.morphs()) {
    double min_score = std::numeric_limits<double>::infinity();
    for (const MorphScoreSet::Subject& s : m.subjects)
      min_score = std::min(min_score, s.sample_scores.front());
    if (min_score > delta) matched += 1.0;
  }
  return matched / scores.morph_count();
}

double prodavg_mmpmr(const MorphScoreSet& scores, double delta) {
  if (scores.morph_count() == 0) fail("empty score set");
  double total = 0.0;
  for (const MorphScoreSet::Morph& m : scores.morphs()) {
    double prod = 1.0;
    for (const MorphScoreSet::Subject& s : m.subjects) {
      int above = 0;
      for (double score : s.sample_scores)
        if (score > delta) ++above;
      prod *= static_cast<double>(above) /
              static_cast<double>(s.sample_scores.size());
    }
    total += prod;
  }
  return total / scores.morph_count();
}

namespace {

struct SplitScores {
  std::vector<double> bona;   // sorted ascending
  std::vector<double> morph;  // sorted ascending
};

SplitScores split_and_check(std::span<const ClassifierRecord> records) {
  SplitScores s;
  for (const ClassifierRecord& r : records) {
    if (!std::isfinite(r.detection_score))
      fail("non-finite detection score for \"", r.image_id, "\"");
    (r.label == ImageLabel::BonaFide ? s.bona : s.morph)
        .push_back(r.detection_score);
  }
  if (s.bona.empty() || s.morph.empty())
    fail("need at least one record of each label (got ", s.bona.size(),
         " bona fide, ", s.morph.size(), " morph)");
  std::sort(s.bona.begin(), s.bona.end());
  std::sort(s.morph.begin(), s.morph.end());
  return s;
}

// Fraction of bona fides classified as morph at threshold t (score >= t).
double bpcer_at(const std::vector<double>& bona, double t) {
  const auto below =
      std::lower_bound(bona.begin(), bona.end(), t) - bona.begin();
  return static_cast<double>(bona.size() - below) / bona.size();
}

// Fraction of morphs classified as bona fide at threshold t (score < t).
double macer_at(const std::vector<double>& morph, double t) {
  const auto below =
      std::lower_bound(morph.begin(), morph.end(), t) - morph.begin();
  return static_cast<double>(below) / morph.size();
}

std::vector<double> candidate_thresholds(const SplitScores& s) {
  std::vector<double> t;
  t.reserve(s.bona.size() + s.morph.size() + 1);
  std::merge(s.bona.begin(), s.bona.end(), s.morph.begin(), s.morph.end(),
             std::back_inserter(t));
  t.erase(std::unique(t.begin(), t.end()), t.end());
  t.push_back(std::numeric_limits<double>::infinity());
  return t;
}

}  // namespace

RocCurve compute_roc(std::span<const ClassifierRecord> records) {
  const SplitScores s = split_and_check(records);
  RocCurve curve;
  for (double t : candidate_thresholds(s))
    curve.points.push_back(RocPoint{t, bpcer_at(s.bona, t), macer_at(s.morph, t)});
  return curve;
}

double equal_error_rate(std::span<const ClassifierRecord> records) {
  const RocCurve curve = compute_roc(records);
  // far starts at 1 with frr 0 and ends at 0 with frr 1, far non-increasing
  // and frr non-decreasing, so far - frr crosses zero exactly once.
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const RocPoint& p = curve.points[i];
    const double diff = p.false_accept_rate - p.false_reject_rate;
    if (diff > 0.0) continue;
    if (diff == 0.0 || i == 0) return p.false_accept_rate;
    const RocPoint& q = curve.points[i - 1];
    const double prev = q.false_accept_rate - q.false_reject_rate;
    const double t = prev / (prev - diff);
    return q.false_accept_rate +
           t * (p.false_accept_rate - q.false_accept_rate);
  }
  fail("EER crossing not found");  // unreachable: last point has far 0, frr 1
}

DetectorOperatingReport macer_at_bpcer(std::span<const ClassifierRecord> records,
                                       std::span<const double> bpcer_targets,
                                       BpcerThresholdRule rule) {
  const SplitScores s = split_and_check(records);
  for (double target : bpcer_targets)
    if (!(target > 0.0 && target < 1.0))
      fail("BPCER target must be in (0,1), got ", target);

  const std::vector<double> thresholds = candidate_thresholds(s);

  DetectorOperatingReport report;
  report.eer = equal_error_rate(records);
  for (double target : bpcer_targets) {
    double chosen = std::numeric_limits<double>::infinity();
    if (rule == BpcerThresholdRule::LargestNotAbove) {
      // BPCER is non-increasing in t: the smallest threshold meeting the
      // target realizes the largest BPCER not exceeding it.
      for (double t : thresholds) {
        if (bpcer_at(s.bona, t) <= target) {
          chosen = t;
          break;
        }
      }
    } else {
      // Largest threshold with BPCER still at or above the target.
      for (double t : thresholds) {
        if (bpcer_at(s.bona, t) >= target) chosen = t;
      }
    }
    report.macer_at_bpcer[target] = macer_at(s.morph, chosen);
  }
  return report;
}

double ema_decay(int batch_size) {
  if (batch_size < 1) fail("batch size must be >= 1, got ", batch_size);
  return std::pow(0.5, batch_size / 1000.0);
}

}  // namespace morpheval

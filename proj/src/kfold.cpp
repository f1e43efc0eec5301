#include <algorithm>

#include "morpheval/error.hpp"
#include "morpheval/harness.hpp"
#include "morpheval/noise.hpp"

namespace morpheval {

std::vector<FoldSplit> stratified_kfold(
    std::span<const ClassifierRecord> records, int k, std::uint64_t seed) {
  if (k < 2) fail("k must be >= 2, got ", k);

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < records.size(); ++i)
    by_class[records[i].label == ImageLabel::Morph ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < static_cast<std::size_t>(k))
      fail("class \"", c == 0 ? "bonafide" : "morph", "\" has ",
           by_class[c].size(), " records, fewer than k = ", k);
  }

  // Fisher-Yates with a library-owned generator, then round-robin dealing:
  // per-class fold sizes differ by at most one.
  SplitMix64 rng(seed);
  std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
  for (auto& cls : by_class) {
    for (std::size_t i = cls.size(); i > 1; --i) {
      const std::uint64_t j = rng.below(i);
      std::swap(cls[i - 1], cls[j]);
    }
    for (std::size_t i = 0; i < cls.size(); ++i)
      folds[i % k].validation.push_back(cls[i]);
  }

  std::vector<int> fold_of(records.size(), -1);
  for (int f = 0; f < k; ++f) {
    std::sort(folds[f].validation.begin(), folds[f].validation.end());
    for (std::size_t idx : folds[f].validation)
      fold_of[idx] = f;
  }
  for (int f = 0; f < k; ++f) {
    for (std::size_t i = 0; i < records.size(); ++i)
      if (fold_of[i] != f) folds[f].train.push_back(i);
  }
  return folds;
}

}  // namespace morpheval

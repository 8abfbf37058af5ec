#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "simptc/error.hpp"
#include "simptc/types.hpp"

namespace simptc {

struct UnbalanceSpec {
  int target_class = 0;
  double keep_ratio = 1.0;
  std::uint64_t seed = 0;
};

/// Ratio grid swept by default.
inline const std::vector<double>& default_unbalance_ratios() {
  static const std::vector<double> grid = {0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9};
  return grid;
}

/// Keeps floor(ratio * count) rows of the target class, chosen uniformly
/// without replacement, and every other row, in original order.
inline LabeledDataset subsample_unbalanced(const LabeledDataset& ds, const UnbalanceSpec& spec) {
  if (!(spec.keep_ratio > 0.0 && spec.keep_ratio <= 1.0))
    throw Error(ErrorKind::Config, "keep ratio must lie in (0, 1]");
  if (ds.gold_labels.size() != ds.size()) throw Error(ErrorKind::Label, "subsampling needs gold labels");
  std::vector<std::size_t> target_rows;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.gold_labels[i]) throw Error(ErrorKind::Label, "subsampling needs gold labels on every row");
    if (*ds.gold_labels[i] == spec.target_class) target_rows.push_back(i);
  }
  if (target_rows.empty())
    throw Error(ErrorKind::EmptyClass, "target class " + std::to_string(spec.target_class) + " has no rows");
  const auto keep = static_cast<std::size_t>(std::floor(spec.keep_ratio * static_cast<double>(target_rows.size())));
  if (keep == 0)
    throw Error(ErrorKind::EmptyClass, "ratio " + std::to_string(spec.keep_ratio) + " keeps no rows of class " +
                                           std::to_string(spec.target_class) + " (" + std::to_string(target_rows.size()) + " rows)");

  std::vector<std::size_t> chosen;
  std::mt19937_64 rng(spec.seed);
  std::sample(target_rows.begin(), target_rows.end(), std::back_inserter(chosen), keep, rng);

  std::vector<bool> drop(ds.size(), false);
  for (auto i : target_rows) drop[i] = true;
  for (auto i : chosen) drop[i] = false;

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!drop[i]) rows.push_back(i);

  LabeledDataset out;
  out.embeddings.values.resize(static_cast<Eigen::Index>(rows.size()), ds.embeddings.values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.embeddings.values.row(static_cast<Eigen::Index>(r)) = ds.embeddings.values.row(static_cast<Eigen::Index>(rows[r]));
    out.ids.push_back(ds.ids[rows[r]]);
    out.gold_labels.push_back(ds.gold_labels[rows[r]]);
    out.splits.push_back(ds.splits[rows[r]]);
  }
  return out;
}

}  // namespace simptc

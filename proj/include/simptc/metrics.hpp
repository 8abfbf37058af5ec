#pragma once

#include <limits>
#include <string>
#include <vector>

#include "simptc/error.hpp"
#include "simptc/types.hpp"

namespace simptc {

struct Metrics {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]
};

/// Per-class F1 is 2TP / (2TP + FP + FN), and 0 when the class has neither
/// predictions nor gold rows. Macro-F1 averages over all K classes.
inline Metrics compute_metrics(const std::vector<int>& pred, const std::vector<int>& gold, int num_classes) {
  if (pred.size() != gold.size())
    throw Error(ErrorKind::Shape, "prediction length " + std::to_string(pred.size()) + " != gold length " +
                                      std::to_string(gold.size()));
  const auto K = static_cast<std::size_t>(num_classes);
  Metrics m;
  m.confusion.assign(K, std::vector<std::size_t>(K, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || gold[i] < 0 || pred[i] >= num_classes || gold[i] >= num_classes)
      throw Error(ErrorKind::Precondition, "label outside [0, K) at row " + std::to_string(i));
    ++m.confusion[static_cast<std::size_t>(gold[i])][static_cast<std::size_t>(pred[i])];
  }
  std::size_t tp_total = 0, fp_total = 0, fn_total = 0;
  double macro = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    std::size_t tp = m.confusion[k][k], fp = 0, fn = 0;
    for (std::size_t j = 0; j < K; ++j) {
      if (j == k) continue;
      fp += m.confusion[j][k];
      fn += m.confusion[k][j];
    }
    const std::size_t denom = 2 * tp + fp + fn;
    const double f1 = denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
    m.per_class_f1.push_back(f1);
    macro += f1;
    tp_total += tp;
    fp_total += fp;
    fn_total += fn;
  }
  m.macro_f1 = K == 0 ? 0.0 : macro / static_cast<double>(K);
  const std::size_t n = pred.size();
  m.accuracy = n == 0 ? 0.0 : static_cast<double>(tp_total) / static_cast<double>(n);
  const std::size_t micro_denom = 2 * tp_total + fp_total + fn_total;
  m.micro_f1 = micro_denom == 0 ? 0.0 : static_cast<double>(2 * tp_total) / static_cast<double>(micro_denom);
  return m;
}

/// Hungarian algorithm, minimizing total cost over a square matrix.
/// Returns assignment[row] = column.
inline std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                           u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] > 0) assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return assignment;
}

struct Alignment {
  std::vector<int> labels;       // relabeled predictions
  std::vector<int> cluster_to_class;
};

/// Relabels cluster ids with the one-to-one mapping that maximizes agreement
/// with `gold`.
inline Alignment align_labels(const std::vector<int>& pred_clusters, const std::vector<int>& gold, int num_classes) {
  if (pred_clusters.size() != gold.size()) throw Error(ErrorKind::Shape, "align_labels: length mismatch");
  const auto K = static_cast<std::size_t>(num_classes);
  std::vector<std::vector<double>> cost(K, std::vector<double>(K, 0.0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred_clusters[i] < 0 || pred_clusters[i] >= num_classes || gold[i] < 0 || gold[i] >= num_classes)
      throw Error(ErrorKind::Precondition, "label outside [0, K) at row " + std::to_string(i));
    cost[static_cast<std::size_t>(pred_clusters[i])][static_cast<std::size_t>(gold[i])] -= 1.0;
  }
  Alignment a;
  a.cluster_to_class = solve_assignment(cost);
  a.labels.reserve(pred_clusters.size());
  for (int c : pred_clusters) a.labels.push_back(a.cluster_to_class[static_cast<std::size_t>(c)]);
  return a;
}

}  // namespace simptc

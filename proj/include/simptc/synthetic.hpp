#pragma once

// Seeded Gaussian-mixture generators for tests, benchmarks and fixtures.

#include <random>
#include <vector>

#include "simptc/types.hpp"

namespace simptc::synthetic {

struct Mixture {
  Matrix x;                 // N x d
  std::vector<int> labels;  // component of each row
  Matrix means;             // d x K
};

/// Draws counts[k] points from N(means.col(k), factors[k] factors[k]^T), rows
/// grouped by component. An empty `factors` means identity covariance.
inline Mixture sample(const Matrix& means, const std::vector<Matrix>& factors, const std::vector<std::size_t>& counts,
                      std::mt19937_64& rng) {
  const Eigen::Index d = means.rows();
  std::size_t n = 0;
  for (auto c : counts) n += c;
  Mixture m;
  m.means = means;
  m.x.resize(static_cast<Eigen::Index>(n), d);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i, ++row) {
      Vector z(d);
      for (Eigen::Index j = 0; j < d; ++j) z(j) = normal(rng);
      Vector p = factors.empty() ? z : Vector(factors[k] * z);
      m.x.row(row) = (means.col(static_cast<Eigen::Index>(k)) + p).transpose();
      m.labels.push_back(static_cast<int>(k));
    }
  }
  return m;
}

/// Replaces `fraction` of the labels with a different, uniformly drawn class.
inline std::vector<int> corrupt_labels(std::vector<int> labels, int num_classes, double fraction, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> shift(1, std::max(1, num_classes - 1));
  for (int& l : labels)
    if (num_classes > 1 && unit(rng) < fraction) l = (l + shift(rng)) % num_classes;
  return labels;
}

/// Random mixture with means on a sphere of radius `separation` and random
/// full covariances A A^T / d + 0.5 I.
inline Mixture random_mixture(Eigen::Index d, int num_components, std::size_t n, double separation, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  Matrix means(d, num_components);
  std::vector<Matrix> factors;
  std::vector<double> weights;
  for (int k = 0; k < num_components; ++k) {
    Vector dir(d);
    for (Eigen::Index j = 0; j < d; ++j) dir(j) = normal(rng);
    means.col(k) = separation * dir / dir.norm();
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng);
    Matrix cov = a * a.transpose() / static_cast<double>(d) + 0.5 * Matrix::Identity(d, d);
    factors.push_back(Eigen::LLT<Matrix>(cov).matrixL());
    weights.push_back(unit(rng));
  }
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<std::size_t> counts;
  std::size_t assigned = 0;
  for (int k = 0; k < num_components; ++k) {
    auto c = static_cast<std::size_t>(static_cast<double>(n) * weights[static_cast<std::size_t>(k)] / total);
    if (k == num_components - 1) c = n - assigned;
    counts.push_back(c);
    assigned += c;
  }
  return sample(means, factors, counts, rng);
}

}  // namespace simptc::synthetic

#pragma once

#include <string>
#include <vector>

#include "simptc/error.hpp"
#include "simptc/linalg.hpp"
#include "simptc/types.hpp"

namespace simptc {

struct SigmaInit {
  Matrix covariance;
  bool diagonal_fallback = false;
};

inline constexpr double kMaxSigmaInitCondition = 1e12;

/// Unbiased empirical covariance plus an eps*tr/d ridge. Rank-deficient or
/// badly conditioned (> 1e12) covariances fall back to their diagonal.
inline SigmaInit compute_sigma_init(const Matrix& x) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (n < 2) throw Error(ErrorKind::InsufficientData, "empirical covariance needs at least 2 rows, got " + std::to_string(n));
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  const double ridge = ridge_for(cov);

  bool fallback = n - 1 < d;
  if (!fallback) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    fallback = !(lo > 0.0) || hi / lo > kMaxSigmaInitCondition;
  }
  SigmaInit out;
  out.diagonal_fallback = fallback;
  if (fallback) out.covariance = Matrix(cov.diagonal().asDiagonal());
  else out.covariance = cov;
  out.covariance.diagonal().array() += ridge;
  return out;
}

struct InitResult {
  Matrix responsibilities;
  std::vector<std::string> warnings;
};

/// One-hot responsibilities from hard labels.
inline InitResult init_from_assignment(const std::vector<int>& labels, int num_classes) {
  if (num_classes < 1) throw Error(ErrorKind::Precondition, "need at least one class");
  InitResult out;
  out.responsibilities = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= num_classes)
      throw Error(ErrorKind::Precondition, "label " + std::to_string(l) + " at row " + std::to_string(i) +
                                               " outside [0, " + std::to_string(num_classes) + ")");
    out.responsibilities(static_cast<Eigen::Index>(i), l) = 1.0;
    ++counts[static_cast<std::size_t>(l)];
  }
  for (int k = 0; k < num_classes; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0)
      out.warnings.push_back("class " + std::to_string(k) + " receives no rows from the initial assignment");
  return out;
}

inline constexpr double kEmptyComponent = 1e-10;

/// Responsibility-weighted counts N_k, means xbar_k and scatter S_k.
struct SufficientStats {
  std::size_t rows = 0;
  Vector counts;                // K
  Matrix means;                 // d x K
  std::vector<Matrix> scatter;  // K matrices, d x d, normalized by N_k

  int num_components() const { return static_cast<int>(counts.size()); }
  Eigen::Index dim() const { return means.rows(); }
};

inline void check_responsibilities(const Matrix& x, const Matrix& resp) {
  if (resp.rows() != x.rows())
    throw Error(ErrorKind::Shape, "responsibilities have " + std::to_string(resp.rows()) + " rows, data has " +
                                      std::to_string(x.rows()));
  if (resp.cols() < 1) throw Error(ErrorKind::Shape, "responsibilities need at least one column");
}

/// Components with N_k below 1e-10 get xbar_k = `empty_mean` and S_k = 0.
inline SufficientStats accumulate_stats(const Matrix& x, const Matrix& resp, const Vector& empty_mean) {
  check_responsibilities(x, resp);
  const Eigen::Index d = x.cols(), k_count = resp.cols();
  SufficientStats s;
  s.rows = static_cast<std::size_t>(x.rows());
  s.counts = resp.colwise().sum().transpose();
  s.means.resize(d, k_count);
  s.scatter.resize(static_cast<std::size_t>(k_count));
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double nk = s.counts(k);
    if (nk < kEmptyComponent) {
      s.means.col(k) = empty_mean;
      s.scatter[static_cast<std::size_t>(k)] = Matrix::Zero(d, d);
      continue;
    }
    Vector mean = (x.transpose() * resp.col(k)) / nk;
    Matrix centered = x.rowwise() - mean.transpose();
    Matrix weighted = centered.array().colwise() * resp.col(k).array();
    Matrix scatter = (centered.transpose() * weighted) / nk;
    s.means.col(k) = mean;
    s.scatter[static_cast<std::size_t>(k)] = 0.5 * (scatter + scatter.transpose());
  }
  return s;
}

}  // namespace simptc

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/digamma.hpp>

#include "simptc/error.hpp"
#include "simptc/types.hpp"

namespace simptc {

inline constexpr double kRidgeEpsilon = 1e-6;

// Smallest accepted squared Cholesky pivot relative to the largest diagonal
// entry. Below this the matrix is treated as numerically singular.
inline constexpr double kPivotFloor = 1e-12;

inline double digamma(double x) { return boost::math::digamma(x); }

/// Sum that does not depend on the order of its inputs (sorted before adding).
inline double order_invariant_sum(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// Lower Cholesky factor of `a`, or nullopt if `a` is not numerically SPD.
inline std::optional<Matrix> try_cholesky(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Matrix lower = llt.matrixL();
  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag)) return std::nullopt;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) {
    const double p = lower(i, i);
    if (!std::isfinite(p) || !(p * p > kPivotFloor * max_diag)) return std::nullopt;
  }
  return lower;
}

inline double ridge_for(const Matrix& a) {
  const double mean_diag = a.trace() / static_cast<double>(a.rows());
  return kRidgeEpsilon * (mean_diag > 0.0 ? mean_diag : 1.0);
}

struct RidgedCholesky {
  Matrix lower;
  bool ridged = false;
};

/// Cholesky with one ridge retry (eps * tr/d on the diagonal).
inline RidgedCholesky cholesky_with_ridge(const Matrix& a, const std::string& what) {
  if (auto l = try_cholesky(a)) return {std::move(*l), false};
  Matrix b = a;
  b.diagonal().array() += ridge_for(a);
  if (auto l = try_cholesky(b)) return {std::move(*l), true};
  throw Error(ErrorKind::Numerical, what + " is not positive definite even after ridge regularization");
}

/// log|A| from the lower Cholesky factor of A.
inline double log_det_from_cholesky(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

/// Squared Mahalanobis-style norms ||L^{-1}(x_n - mean)||^2 for every row of x.
inline Vector whitened_sq_norms(const Matrix& x, const Vector& mean, const Matrix& lower) {
  Matrix diff = (x.rowwise() - mean.transpose()).transpose();
  lower.triangularView<Eigen::Lower>().solveInPlace(diff);
  return diff.colwise().squaredNorm().transpose();
}

/// Row-wise softmax of log-weights, computed in log space. Returns per-row
/// log-sum-exp through `lse` when given.
inline Matrix softmax_rows(const Matrix& log_w, Vector* lse = nullptr) {
  Matrix out(log_w.rows(), log_w.cols());
  if (lse) lse->resize(log_w.rows());
  std::vector<double> buf(static_cast<std::size_t>(log_w.cols()));
  for (Eigen::Index i = 0; i < log_w.rows(); ++i) {
    const double mx = log_w.row(i).maxCoeff();
    for (Eigen::Index k = 0; k < log_w.cols(); ++k) {
      const double e = std::exp(log_w(i, k) - mx);
      out(i, k) = e;
      buf[static_cast<std::size_t>(k)] = e;
    }
    const double s = order_invariant_sum(buf);
    out.row(i) /= s;
    if (lse) (*lse)(i) = mx + std::log(s);
  }
  return out;
}

}  // namespace simptc

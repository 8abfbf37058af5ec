#pragma once

#include <string>

#include <Eigen/SVD>

#include "simptc/error.hpp"
#include "simptc/types.hpp"

namespace simptc {

inline constexpr double kDefaultPcaTargetError = 0.03;

struct PcaModel {
  Vector mean;                 // d
  Matrix components;           // k x d, orthonormal rows
  Vector explained_variance;   // k, non-increasing
  double total_variance = 0.0;
  double target_error = 0.0;

  Eigen::Index dim() const { return mean.size(); }
  Eigen::Index rank() const { return components.rows(); }

  /// 1 - (retained variance / total variance).
  double reconstruction_error() const { return 1.0 - explained_variance.sum() / total_variance; }
};

namespace detail {

struct PcaSpectrum {
  Vector mean;
  Matrix directions;  // d x r, columns sorted by variance
  Vector variances;   // r
  double total = 0.0;
};

// Thin SVD of the centered data; no covariance matrix is formed.
inline PcaSpectrum pca_spectrum(const Matrix& x) {
  if (x.rows() < 2) throw Error(ErrorKind::InsufficientData, "PCA needs at least 2 rows");
  PcaSpectrum s;
  s.mean = x.colwise().mean().transpose();
  Matrix centered = x.rowwise() - s.mean.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  s.variances = svd.singularValues().array().square() / static_cast<double>(x.rows() - 1);
  s.directions = svd.matrixV();
  s.total = s.variances.sum();
  if (!(s.total > 0.0)) throw Error(ErrorKind::Data, "PCA on data with zero total variance");
  // Sign convention: the largest-magnitude entry of each direction is positive.
  for (Eigen::Index c = 0; c < s.directions.cols(); ++c) {
    Eigen::Index arg = 0;
    s.directions.col(c).cwiseAbs().maxCoeff(&arg);
    if (s.directions(arg, c) < 0.0) s.directions.col(c) *= -1.0;
  }
  return s;
}

inline PcaModel truncate(const PcaSpectrum& s, Eigen::Index k, double target) {
  PcaModel m;
  m.mean = s.mean;
  m.components = s.directions.leftCols(k).transpose();
  m.explained_variance = s.variances.head(k);
  m.total_variance = s.total;
  m.target_error = target;
  return m;
}

}  // namespace detail

/// Smallest k whose discarded variance fraction is at most `target_error`.
inline PcaModel pca_fit(const Matrix& x, double target_error = kDefaultPcaTargetError) {
  if (!(target_error > 0.0 && target_error < 1.0))
    throw Error(ErrorKind::Config, "PCA target error must lie in (0, 1)");
  auto s = detail::pca_spectrum(x);
  double retained = 0.0;
  Eigen::Index k = 0;
  while (k < s.variances.size()) {
    retained += s.variances(k);
    ++k;
    if (1.0 - retained / s.total <= target_error) break;
  }
  return detail::truncate(s, k, target_error);
}

/// Fixed-rank variant used for 2-d/3-d exports.
inline PcaModel pca_fit_rank(const Matrix& x, Eigen::Index k) {
  auto s = detail::pca_spectrum(x);
  if (k < 1 || k > s.variances.size())
    throw Error(ErrorKind::Config, "PCA rank " + std::to_string(k) + " outside [1, " + std::to_string(s.variances.size()) + "]");
  auto m = detail::truncate(s, k, 0.0);
  m.target_error = m.reconstruction_error();
  return m;
}

inline Matrix pca_transform(const PcaModel& model, const Matrix& x) {
  if (x.cols() != model.dim())
    throw Error(ErrorKind::Shape, "PCA transform: data dimension " + std::to_string(x.cols()) + " != " +
                                      std::to_string(model.dim()));
  return (x.rowwise() - model.mean.transpose()) * model.components.transpose();
}

inline Matrix pca_reconstruct(const PcaModel& model, const Matrix& reduced) {
  return (reduced * model.components).rowwise() + model.mean.transpose();
}

inline Vector pca_transform(const PcaModel& model, const Vector& v) {
  if (v.size() != model.dim()) throw Error(ErrorKind::Shape, "PCA transform: vector dimension mismatch");
  return model.components * (v - model.mean);
}

}  // namespace simptc

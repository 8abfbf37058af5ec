#pragma once

// Maximum-likelihood EM for a Gaussian mixture. Same initialization,
// covariance modes, ridge handling and stopping rule as bgmm_fit, no priors.

#include <limits>
#include <string>
#include <vector>

#include "simptc/bgmm.hpp"
#include "simptc/linalg.hpp"
#include "simptc/stats.hpp"

namespace simptc {

struct GmmFit {
  Vector weights;
  Matrix means;                     // d x K
  std::vector<Matrix> covariances;  // K in Full mode, one shared in Tied
  std::vector<int> labels;
  std::vector<IterationRecord> log;
  std::size_t collapsed_components = 0;  // components that lost all mass
  std::size_t ridged_components = 0;     // singular covariances that needed the ridge
  bool converged = false;
};

inline GmmFit gmm_fit(const Matrix& x, const Matrix& init, CovarianceMode mode, const FitConfig& config) {
  config.validate();
  check_responsibilities(x, init);
  const Eigen::Index d = x.cols();
  const int K = static_cast<int>(init.cols());
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  const Vector global_mean = x.colwise().mean().transpose();

  GmmFit fit;
  fit.means = Matrix::Zero(d, K);
  fit.weights = Vector::Zero(K);
  std::vector<Matrix> chol(static_cast<std::size_t>(mode == CovarianceMode::Full ? K : 1));
  std::vector<bool> alive(static_cast<std::size_t>(K), true);

  std::vector<int> previous = argmax_rows(init);
  Matrix resp = init;
  for (int it = 1; it <= config.max_iter; ++it) {
    try {
      auto stats = accumulate_stats(x, resp, global_mean);
      const double n = static_cast<double>(x.rows());
      fit.ridged_components = 0;
      Matrix pooled = Matrix::Zero(d, d);
      for (int k = 0; k < K; ++k) {
        const double nk = stats.counts(k);
        if (nk < kEmptyComponent) {
          if (alive[static_cast<std::size_t>(k)]) ++fit.collapsed_components;
          alive[static_cast<std::size_t>(k)] = false;
          fit.weights(k) = 0.0;
          continue;
        }
        alive[static_cast<std::size_t>(k)] = true;
        fit.weights(k) = nk / n;
        fit.means.col(k) = stats.means.col(k);
        if (mode == CovarianceMode::Tied) pooled += nk * stats.scatter[static_cast<std::size_t>(k)];
      }
      if (mode == CovarianceMode::Full) {
        fit.covariances.assign(static_cast<std::size_t>(K), Matrix());
        for (int k = 0; k < K; ++k) {
          if (!alive[static_cast<std::size_t>(k)]) continue;
          auto c = cholesky_with_ridge(stats.scatter[static_cast<std::size_t>(k)], "covariance of component " + std::to_string(k));
          fit.ridged_components += c.ridged;
          chol[static_cast<std::size_t>(k)] = c.lower;
          fit.covariances[static_cast<std::size_t>(k)] = c.lower * c.lower.transpose();
        }
      } else {
        pooled /= n;
        auto c = cholesky_with_ridge(pooled, "shared covariance");
        fit.ridged_components += c.ridged;
        chol[0] = c.lower;
        fit.covariances = {c.lower * c.lower.transpose()};
      }

      Matrix log_w(x.rows(), K);
      for (int k = 0; k < K; ++k) {
        if (!alive[static_cast<std::size_t>(k)]) {
          log_w.col(k).setConstant(-std::numeric_limits<double>::infinity());
          continue;
        }
        const Matrix& l = chol[mode == CovarianceMode::Full ? static_cast<std::size_t>(k) : 0];
        Vector maha = whitened_sq_norms(x, fit.means.col(k), l);
        const double c = std::log(fit.weights(k)) - 0.5 * static_cast<double>(d) * log_two_pi - 0.5 * log_det_from_cholesky(l);
        log_w.col(k) = (c - 0.5 * maha.array()).matrix();
      }
      Vector lse;
      resp = softmax_rows(log_w, &lse);
      if (!lse.allFinite()) throw Error(ErrorKind::Numerical, "non-finite log-likelihood");
      auto labels = argmax_rows(resp);
      const std::size_t changes = count_changes(labels, previous);
      fit.log.push_back({it, lse.sum(), changes});
      fit.labels = labels;
      if (config.stop_on_stable_labels && changes <= static_cast<std::size_t>(config.label_change_tolerance)) {
        fit.converged = true;
        break;
      }
      previous = std::move(labels);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Numerical)
        throw Error(ErrorKind::Numerical, "GMM iteration " + std::to_string(it) + ": " + e.what());
      throw;
    }
  }
  return fit;
}

}  // namespace simptc

#pragma once

// Variational Bayesian Gaussian mixture with a Dirichlet prior on the mixing
// weights and a Gaussian-Wishart prior on means and precisions.

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "simptc/error.hpp"
#include "simptc/linalg.hpp"
#include "simptc/stats.hpp"
#include "simptc/types.hpp"

namespace simptc {

enum class CovarianceMode { Full, Tied };

inline const char* to_string(CovarianceMode m) { return m == CovarianceMode::Full ? "full" : "tied"; }

inline CovarianceMode parse_covariance_mode(const std::string& s) {
  if (s == "full") return CovarianceMode::Full;
  if (s == "tied") return CovarianceMode::Tied;
  throw Error(ErrorKind::Config, "covariance mode must be 'full' or 'tied', got '" + s + "'");
}

inline constexpr double kDefaultBeta0 = 1e-10;

/// Prior hyperparameters. The Wishart scale is stored through its inverse,
/// `scale_inv = W0^{-1}`, which is what the updates consume.
struct Priors {
  double alpha0 = 1.0;
  double beta0 = kDefaultBeta0;
  Vector m0;
  Matrix scale_inv;
  double nu0 = 1.0;

  /// alpha0 = N/K, beta0 = 1e-10, m0 = 0, W0 = (1/d) Sigma_init^{-1}, nu0 = d.
  static Priors noninformative(std::size_t n, int num_components, const Matrix& sigma_init) {
    const auto d = sigma_init.rows();
    Priors p;
    p.alpha0 = static_cast<double>(n) / static_cast<double>(num_components);
    p.beta0 = kDefaultBeta0;
    p.m0 = Vector::Zero(d);
    p.scale_inv = static_cast<double>(d) * sigma_init;
    p.nu0 = static_cast<double>(d);
    return p;
  }

  void validate() const {
    const auto d = static_cast<double>(m0.size());
    if (!(alpha0 > 0.0)) throw Error(ErrorKind::Config, "alpha0 must be positive");
    if (!(beta0 > 0.0)) throw Error(ErrorKind::Config, "beta0 must be positive");
    if (!(nu0 > d - 1.0)) throw Error(ErrorKind::Config, "nu0 must exceed d - 1");
    if (scale_inv.rows() != m0.size() || scale_inv.cols() != m0.size())
      throw Error(ErrorKind::Shape, "prior scale and mean dimensions disagree");
    if (!try_cholesky(scale_inv)) throw Error(ErrorKind::Config, "prior Wishart scale is not positive definite");
  }
};

/// Wishart posterior over a precision matrix, kept as the Cholesky factor of
/// the inverse scale: W^{-1} = L L^T.
struct WishartFactor {
  Matrix scale_inv_chol;
  double nu = 0.0;

  double log_det_scale() const { return -log_det_from_cholesky(scale_inv_chol); }

  /// E[ln |Lambda|] = sum_i psi((nu + 1 - i)/2) + d ln 2 + ln |W|.
  double expected_log_det_precision() const {
    const auto d = scale_inv_chol.rows();
    double s = 0.0;
    for (Eigen::Index i = 1; i <= d; ++i) s += digamma((nu + 1.0 - static_cast<double>(i)) / 2.0);
    return s + static_cast<double>(d) * std::numbers::ln2 + log_det_scale();
  }
};

struct VariationalState {
  CovarianceMode mode = CovarianceMode::Full;
  Vector alpha;  // K
  Vector beta;   // K
  Matrix means;  // d x K
  std::vector<WishartFactor> precisions;  // K in Full mode, one shared in Tied
  Matrix responsibilities;                // N x K, last E-step
  std::vector<double> elbo_history;

  int num_components() const { return static_cast<int>(alpha.size()); }
  Eigen::Index dim() const { return means.rows(); }

  const WishartFactor& precision(int k) const {
    return precisions[mode == CovarianceMode::Tied ? 0 : static_cast<std::size_t>(k)];
  }
};

/// Conjugate posterior update from sufficient statistics. In Tied mode one
/// Wishart factor pools the scatter of all components with nu = nu0 + N.
inline VariationalState m_step(const SufficientStats& stats, const Priors& priors, CovarianceMode mode) {
  const int K = stats.num_components();
  const Eigen::Index d = stats.dim();
  if (priors.m0.size() != d) throw Error(ErrorKind::Shape, "prior mean dimension does not match the data");

  VariationalState st;
  st.mode = mode;
  st.alpha.resize(K);
  st.beta.resize(K);
  st.means.resize(d, K);

  std::vector<Matrix> data_terms(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const double nk = stats.counts(k);
    st.alpha(k) = priors.alpha0 + nk;
    st.beta(k) = priors.beta0 + nk;
    st.means.col(k) = (priors.beta0 * priors.m0 + nk * stats.means.col(k)) / st.beta(k);
    Vector dev = stats.means.col(k) - priors.m0;
    data_terms[static_cast<std::size_t>(k)] =
        nk * stats.scatter[static_cast<std::size_t>(k)] + (priors.beta0 * nk / (priors.beta0 + nk)) * (dev * dev.transpose());
  }

  if (mode == CovarianceMode::Full) {
    for (int k = 0; k < K; ++k) {
      Matrix scale_inv = priors.scale_inv + data_terms[static_cast<std::size_t>(k)];
      auto chol = cholesky_with_ridge(scale_inv, "Wishart inverse scale of component " + std::to_string(k));
      st.precisions.push_back({std::move(chol.lower), priors.nu0 + stats.counts(k)});
    }
  } else {
    // Pool in a canonical component order so the result does not depend on
    // how components are numbered.
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (stats.counts(a) != stats.counts(b)) return stats.counts(a) < stats.counts(b);
      for (Eigen::Index j = 0; j < d; ++j)
        if (stats.means(j, a) != stats.means(j, b)) return stats.means(j, a) < stats.means(j, b);
      return false;
    });
    Matrix scale_inv = priors.scale_inv;
    for (int k : order) scale_inv += data_terms[static_cast<std::size_t>(k)];
    auto chol = cholesky_with_ridge(scale_inv, "shared Wishart inverse scale");
    st.precisions.push_back({std::move(chol.lower), priors.nu0 + static_cast<double>(stats.rows)});
  }
  return st;
}

struct EStepResult {
  Matrix log_rho;
  Matrix responsibilities;
  double elbo_surrogate = 0.0;  // sum_n logsumexp_k log rho_nk
};

inline Matrix log_rho(const Matrix& x, const VariationalState& st) {
  const int K = st.num_components();
  const Eigen::Index d = st.dim();
  if (x.cols() != d)
    throw Error(ErrorKind::Shape, "data dimension " + std::to_string(x.cols()) + " != model dimension " + std::to_string(d));
  std::vector<double> alphas(st.alpha.data(), st.alpha.data() + K);
  const double psi_total = digamma(order_invariant_sum(alphas));
  const double log_two_pi = std::log(2.0 * std::numbers::pi);

  Matrix out(x.rows(), K);
  for (int k = 0; k < K; ++k) {
    const auto& prec = st.precision(k);
    const double e_log_pi = digamma(st.alpha(k)) - psi_total;
    const double e_log_det = prec.expected_log_det_precision();
    Vector maha = whitened_sq_norms(x, st.means.col(k), prec.scale_inv_chol);
    const double constant = e_log_pi + 0.5 * e_log_det - 0.5 * static_cast<double>(d) * log_two_pi -
                            0.5 * static_cast<double>(d) / st.beta(k);
    out.col(k) = (constant - 0.5 * prec.nu * maha.array()).matrix();
    for (Eigen::Index n = 0; n < x.rows(); ++n)
      if (!std::isfinite(out(n, k)))
        throw Error(ErrorKind::Numerical, "non-finite log responsibility for component " + std::to_string(k) +
                                              " at row " + std::to_string(n));
  }
  return out;
}

inline EStepResult e_step(const Matrix& x, const VariationalState& st) {
  EStepResult r;
  r.log_rho = log_rho(x, st);
  Vector lse;
  r.responsibilities = softmax_rows(r.log_rho, &lse);
  r.elbo_surrogate = lse.sum();
  return r;
}

struct FitConfig {
  int max_iter = 100;
  int label_change_tolerance = 0;
  bool stop_on_stable_labels = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (max_iter < 1) throw Error(ErrorKind::Config, "max_iter must be at least 1");
    if (label_change_tolerance < 0) throw Error(ErrorKind::Config, "label_change_tolerance must be non-negative");
  }
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;  // ELBO surrogate (BGMM) or log-likelihood (GMM)
  std::size_t label_changes = 0;
};

struct BgmmFit {
  VariationalState state;
  std::vector<int> labels;
  std::vector<IterationRecord> log;
  bool converged = false;
};

inline std::size_t count_changes(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < a.size(); ++i) c += a[i] != b[i];
  return c;
}

using BgmmObserver = std::function<void(int iteration, const VariationalState&)>;

/// Alternates M- and E-steps starting from `init`. Stops once an E-step
/// changes at most `label_change_tolerance` hard labels, or after max_iter.
inline BgmmFit bgmm_fit(const Matrix& x, const Matrix& init, const Priors& priors, CovarianceMode mode,
                        const FitConfig& config, const BgmmObserver& observer = {}) {
  config.validate();
  priors.validate();
  check_responsibilities(x, init);
  if (priors.m0.size() != x.cols()) throw Error(ErrorKind::Shape, "prior dimension does not match the data");

  BgmmFit fit;
  std::vector<int> previous = argmax_rows(init);
  Matrix resp = init;
  for (int it = 1; it <= config.max_iter; ++it) {
    try {
      auto stats = accumulate_stats(x, resp, priors.m0);
      VariationalState next = m_step(stats, priors, mode);
      auto e = e_step(x, next);
      auto labels = argmax_rows(e.responsibilities);
      const std::size_t changes = count_changes(labels, previous);
      fit.log.push_back({it, e.elbo_surrogate, changes});
      next.elbo_history = fit.state.elbo_history;
      next.elbo_history.push_back(e.elbo_surrogate);
      next.responsibilities = std::move(e.responsibilities);
      resp = next.responsibilities;
      fit.state = std::move(next);
      fit.labels = labels;
      if (observer) observer(it, fit.state);
      if (config.stop_on_stable_labels && changes <= static_cast<std::size_t>(config.label_change_tolerance)) {
        fit.converged = true;
        break;
      }
      previous = std::move(labels);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Numerical)
        throw Error(ErrorKind::Numerical, "iteration " + std::to_string(it) + ": " + e.what());
      throw;
    }
  }
  return fit;
}

/// Responsibilities and hard labels for new rows under a fitted state.
inline Assignment predict(const VariationalState& st, const Matrix& x_new) {
  if (x_new.cols() != st.dim())
    throw Error(ErrorKind::Shape, "predict: data dimension " + std::to_string(x_new.cols()) + " != model dimension " +
                                      std::to_string(st.dim()));
  auto e = e_step(x_new, st);
  Assignment a;
  a.labels = argmax_rows(e.responsibilities);
  a.scores = std::move(e.responsibilities);
  return a;
}

/// MAP point estimates implied by the responsibilities (diagnostic only).
struct MapEstimate {
  Vector weights;
  Matrix means;
  std::vector<Matrix> covariances;
};

inline MapEstimate map_parameters(const SufficientStats& stats, const Priors& priors, const Matrix& sigma_init) {
  const int K = stats.num_components();
  const double n = static_cast<double>(stats.rows);
  const double d = static_cast<double>(stats.dim());
  MapEstimate out;
  out.weights.resize(K);
  out.means = stats.means;
  for (int k = 0; k < K; ++k) {
    const double nk = stats.counts(k);
    out.weights(k) = (priors.alpha0 - 1.0 + nk) / (static_cast<double>(K) * (priors.alpha0 - 1.0) + n);
    if (nk < 2.0)
      throw Error(ErrorKind::Numerical, "MAP covariance undefined for component " + std::to_string(k) + " (N_k = " +
                                            std::to_string(nk) + " < 2)");
    out.covariances.push_back((d * sigma_init + nk * stats.scatter[static_cast<std::size_t>(k)]) / (nk - 1.0));
  }
  return out;
}

}  // namespace simptc

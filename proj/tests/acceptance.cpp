// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Tolerances are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "simptc/simptc.hpp"

#ifndef SIMPTC_CLI
#define SIMPTC_CLI "simptc"
#endif

namespace fs = std::filesystem;
using namespace simptc;

namespace {

constexpr double kMonotoneRelTol = 1e-8;
constexpr double kMapMeanTol = 1e-6;
constexpr double kMapSigmaTol = 1e-9;
constexpr double kOracleTol = 1e-8;
constexpr double kRecoveryAccuracy = 0.99;
constexpr double kMetricsTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Brute-force reference for the variational updates, d = 2 only. Written from
// the textbook formulas with explicit 2x2 algebra and a local digamma.

double ref_digamma(double x) {
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double f = 1.0 / (x * x);
  return acc + std::log(x) - 0.5 / x -
         f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132)))));
}

struct M2 {
  double a, b, c, d;  // [[a b] [c d]]
  double det() const { return a * d - b * c; }
  M2 inv() const {
    const double D = det();
    return {d / D, -b / D, -c / D, a / D};
  }
};

struct RefState {
  std::vector<double> alpha, beta, nu;
  std::vector<std::array<double, 2>> m;
  std::vector<M2> W;
  std::vector<std::vector<double>> r;  // N x K
};

RefState ref_iteration(const std::vector<std::array<double, 2>>& x, const std::vector<std::vector<double>>& r, int K,
                       double alpha0, double beta0, const M2& W0inv, double nu0) {
  const std::size_t N = x.size();
  RefState s;
  for (int k = 0; k < K; ++k) {
    double Nk = 0, sx = 0, sy = 0;
    for (std::size_t n = 0; n < N; ++n) {
      Nk += r[n][k];
      sx += r[n][k] * x[n][0];
      sy += r[n][k] * x[n][1];
    }
    const double mx = sx / Nk, my = sy / Nk;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t n = 0; n < N; ++n) {
      const double dx = x[n][0] - mx, dy = x[n][1] - my;
      sxx += r[n][k] * dx * dx;
      sxy += r[n][k] * dx * dy;
      syy += r[n][k] * dy * dy;
    }
    // N_k S_k = raw weighted scatter; m0 = 0.
    const double shrink = beta0 * Nk / (beta0 + Nk);
    M2 winv{W0inv.a + sxx + shrink * mx * mx, W0inv.b + sxy + shrink * mx * my, W0inv.c + sxy + shrink * my * mx,
            W0inv.d + syy + shrink * my * my};
    s.alpha.push_back(alpha0 + Nk);
    s.beta.push_back(beta0 + Nk);
    s.nu.push_back(nu0 + Nk);
    s.m.push_back({Nk * mx / (beta0 + Nk), Nk * my / (beta0 + Nk)});
    s.W.push_back(winv.inv());
  }
  double alpha_sum = 0;
  for (double a : s.alpha) alpha_sum += a;
  s.r.assign(N, std::vector<double>(static_cast<std::size_t>(K)));
  const double pi = 3.14159265358979323846;
  for (std::size_t n = 0; n < N; ++n) {
    std::vector<double> lr(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      const double e_ln_pi = ref_digamma(s.alpha[k]) - ref_digamma(alpha_sum);
      const double e_ln_lambda = ref_digamma(s.nu[k] / 2) + ref_digamma((s.nu[k] - 1) / 2) + 2 * std::log(2.0) +
                                 std::log(s.W[k].det());
      const double dx = x[n][0] - s.m[k][0], dy = x[n][1] - s.m[k][1];
      const M2& W = s.W[k];
      const double quad = dx * (W.a * dx + W.b * dy) + dy * (W.c * dx + W.d * dy);
      lr[k] = e_ln_pi + 0.5 * e_ln_lambda - std::log(2 * pi) - 0.5 * (2.0 / s.beta[k] + s.nu[k] * quad);
    }
    double mx = lr[0];
    for (double v : lr) mx = std::max(mx, v);
    double z = 0;
    for (double v : lr) z += std::exp(v - mx);
    for (int k = 0; k < K; ++k) s.r[n][k] = std::exp(lr[k] - mx) / z;
  }
  return s;
}

// ---------------------------------------------------------------------------

Outcome criterion_elbo_monotone() {
  const std::vector<Eigen::Index> dims = {2, 16, 64};
  const std::vector<int> ks = {2, 5, 14};
  std::mt19937_64 rng(20240601);
  double worst = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = dims[static_cast<std::size_t>(trial % 3)];
    const int K = ks[static_cast<std::size_t>((trial / 3) % 3)];
    auto mix = synthetic::random_mixture(d, K, 2000, 4.0, rng);
    auto init_labels = synthetic::corrupt_labels(mix.labels, K, 0.3, rng);
    auto init = init_from_assignment(init_labels, K).responsibilities;
    auto priors = Priors::noninformative(2000, K, compute_sigma_init(mix.x).covariance);
    FitConfig cfg;
    cfg.max_iter = 100;
    auto fit = bgmm_fit(mix.x, init, priors, CovarianceMode::Full, cfg);
    for (std::size_t i = 1; i < fit.log.size(); ++i) {
      const double prev = fit.log[i - 1].objective, cur = fit.log[i].objective;
      const double rel = (prev - cur) / std::max(1.0, std::abs(prev));
      worst = std::max(worst, rel);
      if (rel > kMonotoneRelTol) ++failures;
    }
  }
  std::ostringstream os;
  os << "20 mixtures, worst relative decrease " << worst << ", violations " << failures;
  return {failures == 0, os.str()};
}

Outcome criterion_map_oracle() {
  std::mt19937_64 rng(11);
  auto mix = synthetic::random_mixture(3, 3, 300, 5.0, rng);
  auto resp = init_from_assignment(mix.labels, 3).responsibilities;
  auto sigma = compute_sigma_init(mix.x).covariance;
  auto priors = Priors::noninformative(300, 3, sigma);
  priors.alpha0 = 1.0;
  priors.beta0 = 1e-10;
  auto stats = accumulate_stats(mix.x, resp, priors.m0);
  auto st = m_step(stats, priors, CovarianceMode::Full);
  auto map = map_parameters(stats, priors, sigma);

  double mean_err = 0.0;
  bool weights_exact = true;
  for (int k = 0; k < 3; ++k) {
    double sx[3] = {0, 0, 0};
    double nk = 0;
    for (Eigen::Index n = 0; n < mix.x.rows(); ++n)
      if (mix.labels[static_cast<std::size_t>(n)] == k) {
        nk += 1;
        for (int j = 0; j < 3; ++j) sx[j] += mix.x(n, j);
      }
    for (int j = 0; j < 3; ++j) mean_err = std::max(mean_err, std::abs(st.means(j, k) - sx[j] / nk));
    weights_exact = weights_exact && map.weights(k) == nk / 300.0;
  }

  // d = 1, Sigma_init = 1, two points at 0 and 2: N_k = 2, S_k = 1.
  Matrix x1(2, 1);
  x1 << 0.0, 2.0;
  Matrix r1 = Matrix::Ones(2, 1);
  Matrix s1 = Matrix::Ones(1, 1);
  auto p1 = Priors::noninformative(2, 1, s1);
  p1.alpha0 = 1.0;
  auto map1 = map_parameters(accumulate_stats(x1, r1, p1.m0), p1, s1);
  const double sigma_star = map1.covariances[0](0, 0);

  std::ostringstream os;
  os << "max |m_k - xbar_k| " << mean_err << ", weights exact " << (weights_exact ? "yes" : "no") << ", Sigma* "
     << sigma_star;
  return {mean_err <= kMapMeanTol && weights_exact && std::abs(sigma_star - 3.0) <= kMapSigmaTol, os.str()};
}

Outcome criterion_small_oracle() {
  std::mt19937_64 rng(3);
  Matrix means(2, 2);
  means << -1.5, 1.5, 0.5, -0.5;
  Matrix f0(2, 2), f1(2, 2);
  f0 << 1.0, 0.0, 0.4, 0.8;
  f1 << 0.7, 0.0, -0.3, 1.1;
  auto mix = synthetic::sample(means, {f0, f1}, {25, 25}, rng);
  auto init_labels = synthetic::corrupt_labels(mix.labels, 2, 0.25, rng);
  auto init = init_from_assignment(init_labels, 2).responsibilities;

  // Sigma_init from a naive two-pass covariance; both sides receive it.
  std::vector<std::array<double, 2>> pts;
  for (Eigen::Index n = 0; n < 50; ++n) pts.push_back({mix.x(n, 0), mix.x(n, 1)});
  double mx = 0, my = 0;
  for (auto& p : pts) mx += p[0] / 50, my += p[1] / 50;
  double cxx = 0, cxy = 0, cyy = 0;
  for (auto& p : pts) {
    cxx += (p[0] - mx) * (p[0] - mx) / 49;
    cxy += (p[0] - mx) * (p[1] - my) / 49;
    cyy += (p[1] - my) * (p[1] - my) / 49;
  }
  Matrix sigma(2, 2);
  sigma << cxx, cxy, cxy, cyy;
  auto priors = Priors::noninformative(50, 2, sigma);

  std::vector<VariationalState> trace;
  FitConfig cfg;
  cfg.max_iter = 5;
  cfg.stop_on_stable_labels = false;
  bgmm_fit(mix.x, init, priors, CovarianceMode::Full, cfg, [&](int, const VariationalState& s) { trace.push_back(s); });

  std::vector<std::vector<double>> r(50, std::vector<double>(2));
  for (int n = 0; n < 50; ++n)
    for (int k = 0; k < 2; ++k) r[n][k] = init(n, k);
  const M2 w0inv{2 * cxx, 2 * cxy, 2 * cxy, 2 * cyy};
  double worst = 0.0;
  for (std::size_t it = 0; it < 5; ++it) {
    auto ref = ref_iteration(pts, r, 2, 25.0, 1e-10, w0inv, 2.0);
    const auto& s = trace.at(it);
    auto upd = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    for (int k = 0; k < 2; ++k) {
      upd(s.alpha(k), ref.alpha[k]);
      upd(s.beta(k), ref.beta[k]);
      upd(s.precisions[k].nu, ref.nu[k]);
      upd(s.means(0, k), ref.m[k][0]);
      upd(s.means(1, k), ref.m[k][1]);
      const Matrix& L = s.precisions[k].scale_inv_chol;
      Matrix W = (L * L.transpose()).inverse();
      upd(W(0, 0), ref.W[k].a);
      upd(W(0, 1), ref.W[k].b);
      upd(W(1, 0), ref.W[k].c);
      upd(W(1, 1), ref.W[k].d);
      for (int n = 0; n < 50; ++n) upd(s.responsibilities(n, k), ref.r[n][k]);
    }
    r = ref.r;
  }
  std::ostringstream os;
  os << "5 iterations, " << trace.size() << " states, worst scalar deviation " << worst;
  return {trace.size() == 5 && worst <= kOracleTol, os.str()};
}

double aligned_accuracy(const std::vector<int>& pred, const std::vector<int>& gold, int K) {
  return compute_metrics(align_labels(pred, gold, K).labels, gold, K).accuracy;
}

Outcome criterion_recovery() {
  const std::vector<Vector> anchors = {(Vector(2) << 1.0, 0.0).finished(), (Vector(2) << -1.0, 0.0).finished()};
  std::mt19937_64 rng(5);
  FitConfig cfg;
  cfg.max_iter = 100;

  Matrix m(2, 2);
  m << 5.0, -5.0, 0.0, 0.0;
  auto bal = synthetic::sample(m, {}, {200, 200}, rng);
  auto init = match_assign(bal.x, anchors);
  auto resp = init_from_assignment(init.labels, 2).responsibilities;
  auto priors = Priors::noninformative(400, 2, compute_sigma_init(bal.x).covariance);
  const double acc_b = aligned_accuracy(bgmm_fit(bal.x, resp, priors, CovarianceMode::Full, cfg).labels, bal.labels, 2);
  const double acc_g = aligned_accuracy(gmm_fit(bal.x, resp, CovarianceMode::Full, cfg).labels, bal.labels, 2);
  const double acc_k = aligned_accuracy(kmeans_fit(bal.x, init.labels, 2, cfg).labels, bal.labels, 2);

  Matrix mu(2, 2);
  mu << 2.5, -2.5, 0.0, 0.0;
  auto unb = synthetic::sample(mu, {}, {100, 1900}, rng);
  auto init_u = match_assign(unb.x, anchors);
  auto resp_u = init_from_assignment(init_u.labels, 2).responsibilities;
  auto priors_u = Priors::noninformative(2000, 2, compute_sigma_init(unb.x).covariance);
  // Tied covariance, the sentiment-data setting the unbalanced sweep uses.
  auto bg = bgmm_fit(unb.x, resp_u, priors_u, CovarianceMode::Tied, cfg);
  const double f1_b = compute_metrics(align_labels(bg.labels, unb.labels, 2).labels, unb.labels, 2).macro_f1;
  auto km = kmeans_fit(unb.x, init_u.labels, 2, cfg);
  const double f1_k = compute_metrics(align_labels(km.labels, unb.labels, 2).labels, unb.labels, 2).macro_f1;

  std::ostringstream os;
  os << "balanced accuracy bgmm " << acc_b << " gmm " << acc_g << " kmeans " << acc_k << "; unbalanced macro-F1 bgmm "
     << f1_b << " kmeans " << f1_k;
  const bool ok = acc_b >= kRecoveryAccuracy && acc_g >= kRecoveryAccuracy && acc_k >= kRecoveryAccuracy && f1_b > f1_k;
  return {ok, os.str()};
}

Outcome criterion_many_class() {
  const Eigen::Index d = 1024;
  const int K = 14;
  std::mt19937_64 rng(1024);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix means(d, K);
  for (int k = 0; k < K; ++k) {
    Vector v(d);
    for (Eigen::Index j = 0; j < d; ++j) v(j) = normal(rng);
    means.col(k) = 2.0 * std::sqrt(static_cast<double>(d)) * v / v.norm();
  }
  auto mix = synthetic::sample(means, {}, std::vector<std::size_t>(K, 50), rng);
  auto init_labels = synthetic::corrupt_labels(mix.labels, K, 0.3, rng);
  auto init = init_from_assignment(init_labels, K).responsibilities;
  FitConfig cfg;
  cfg.max_iter = 30;
  const double init_acc = compute_metrics(init_labels, mix.labels, K).accuracy;

  auto priors = Priors::noninformative(mix.labels.size(), K, compute_sigma_init(mix.x).covariance);
  const double bgmm_acc = compute_metrics(bgmm_fit(mix.x, init, priors, CovarianceMode::Full, cfg).labels, mix.labels, K).accuracy;

  std::ostringstream os;
  os << "init " << init_acc << ", bgmm " << bgmm_acc << ", gmm ";
  bool ok = false;
  try {
    auto g = gmm_fit(mix.x, init, CovarianceMode::Full, cfg);
    const double gmm_acc = aligned_accuracy(g.labels, mix.labels, K);
    os << gmm_acc << " (ridged " << g.ridged_components << ", collapsed " << g.collapsed_components << ")";
    ok = gmm_acc < bgmm_acc;
  } catch (const Error& e) {
    os << "error: " << e.what();
    ok = true;
  }
  return {ok, os.str()};
}

Outcome criterion_metrics() {
  std::mt19937_64 rng(6);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    const int K = 2 + static_cast<int>(rng() % 9);
    const std::size_t n = 1 + rng() % 200;
    std::vector<int> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(K));
      g[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(K));
    }
    auto m = compute_metrics(p, g, K);
    if (m.micro_f1 != m.accuracy) ++mismatches;
  }
  // gold [0,0,1,1], pred [0,1,1,1]: class 0 P=1 R=1/2, class 1 P=2/3 R=1.
  auto m = compute_metrics({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
  const double f0 = 2 * 1.0 * 0.5 / (1.0 + 0.5), f1 = 2 * (2.0 / 3) * 1.0 / (2.0 / 3 + 1.0);
  const double macro = (f0 + f1) / 2;
  std::ostringstream os;
  os << "micro != accuracy in " << mismatches << "/1000; hand example macro " << m.macro_f1 << " micro " << m.micro_f1;
  return {mismatches == 0 && std::abs(m.macro_f1 - macro) <= kMetricsTol && std::abs(m.micro_f1 - 0.75) <= kMetricsTol &&
              std::abs(macro - 11.0 / 15.0) <= kMetricsTol,
          os.str()};
}

Outcome criterion_pca() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  int wrong = 0, cases = 0;
  for (int t = 0; t < 12; ++t) {
    const Eigen::Index n = 300, d = 20 + 5 * (t % 4), r = 2 + t % 6;
    Matrix u(n, r), v(r, d), noise(n, d);
    for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = normal(rng) * (1.0 + static_cast<double>(i % r));
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = 0.05 * (1 + t % 3) * normal(rng);
    Matrix x = u * v + noise;
    // Independent spectrum: eigenvalues of the sample covariance.
    Matrix c = x.rowwise() - x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Matrix> es((c.transpose() * c) / static_cast<double>(n - 1));
    Vector ev = es.eigenvalues().reverse();
    const double total = ev.sum();
    for (double target : {0.01, 0.03, 0.1, 0.3}) {
      Eigen::Index expect = d;
      for (Eigen::Index k = 1; k <= d; ++k)
        if (1.0 - ev.head(k).sum() / total <= target) {
          expect = k;
          break;
        }
      ++cases;
      if (pca_fit(x, target).rank() != expect) ++wrong;
    }
  }
  std::ostringstream os;
  os << wrong << "/" << cases << " ranks differ from the sweep; default target " << kDefaultPcaTargetError;
  return {wrong == 0 && kDefaultPcaTargetError == 0.03, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "simptc_acceptance_determinism";
  fs::remove_all(dir);
  const auto config = synthetic::write_fixture(dir);
  const std::string cmd = std::string("\"") + SIMPTC_CLI + "\" pipeline --config \"" + config.string() + "\" 2>/dev/null";
  std::vector<std::string> metrics, assignments;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir / "out");
    if (std::system(cmd.c_str()) != 0) return {false, "pipeline run " + std::to_string(run + 1) + " failed"};
    metrics.push_back(slurp(dir / "out" / "metrics.json"));
    assignments.push_back(slurp(dir / "out" / "assignments.jsonl"));
  }
  const bool ok = !metrics[0].empty() && !assignments[0].empty() && metrics[0] == metrics[1] &&
                  assignments[0] == assignments[1];
  fs::remove_all(dir);
  return {ok, ok ? "metrics.json and assignments.jsonl byte-identical across two runs" : "outputs differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> checks = {
      {"1 ELBO-surrogate monotone", criterion_elbo_monotone},
      {"2 MAP oracle", criterion_map_oracle},
      {"3 small-instance oracle", criterion_small_oracle},
      {"4 synthetic recovery", criterion_recovery},
      {"5 many-class GMM failure mode", criterion_many_class},
      {"6 metrics", criterion_metrics},
      {"7 PCA rank", criterion_pca},
      {"8 pipeline determinism", criterion_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}

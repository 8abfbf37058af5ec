#include <random>

#include "simptc/gmm.hpp"
#include "simptc/kmeans.hpp"
#include "simptc/metrics.hpp"
#include "simptc/stats.hpp"
#include "simptc/synthetic.hpp"
#include "test_util.hpp"

using namespace simptc;

namespace {

synthetic::Mixture blobs(double sep, std::vector<std::size_t> counts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Matrix m(2, 2);
  m << sep, -sep, 0.0, 0.0;
  return synthetic::sample(m, {}, counts, rng);
}

double aligned_accuracy(const std::vector<int>& pred, const std::vector<int>& gold, int K) {
  return compute_metrics(align_labels(pred, gold, K).labels, gold, K).accuracy;
}

}  // namespace

TEST(Gmm, RecoversSeparatedMixture) {
  auto mix = blobs(5.0, {200, 200}, 1);
  std::mt19937_64 rng(2);
  auto init = init_from_assignment(synthetic::corrupt_labels(mix.labels, 2, 0.2, rng), 2).responsibilities;
  for (auto mode : {CovarianceMode::Full, CovarianceMode::Tied}) {
    auto fit = gmm_fit(mix.x, init, mode, FitConfig{});
    EXPECT_GE(aligned_accuracy(fit.labels, mix.labels, 2), 0.99);
    EXPECT_NEAR(fit.weights.sum(), 1.0, 1e-12);
  }
}

TEST(Gmm, SingleComponentIsEmpiricalMoments) {
  auto mix = blobs(2.0, {50, 70}, 3);
  auto fit = gmm_fit(mix.x, Matrix::Ones(mix.x.rows(), 1), CovarianceMode::Full, FitConfig{});
  Vector mean = mix.x.colwise().mean().transpose();
  Matrix c = mix.x.rowwise() - mean.transpose();
  Matrix cov = c.transpose() * c / static_cast<double>(mix.x.rows());
  EXPECT_LE((fit.means.col(0) - mean).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE((fit.covariances[0] - cov).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Gmm, EmptyInitComponentCollapses) {
  auto mix = blobs(5.0, {100, 100}, 4);
  Matrix init = Matrix::Zero(mix.x.rows(), 3);
  for (std::size_t i = 0; i < mix.labels.size(); ++i) init(static_cast<Eigen::Index>(i), mix.labels[i]) = 1.0;
  auto fit = gmm_fit(mix.x, init, CovarianceMode::Full, FitConfig{});
  EXPECT_EQ(fit.collapsed_components, 1u);
  EXPECT_EQ(fit.weights(2), 0.0);
  for (int l : fit.labels) EXPECT_NE(l, 2);
}

TEST(Gmm, FewerPointsThanDimensionsNeedsRidge) {
  std::mt19937_64 rng(5);
  auto mix = synthetic::random_mixture(40, 2, 30, 6.0, rng);
  auto init = init_from_assignment(mix.labels, 2).responsibilities;
  auto fit = gmm_fit(mix.x, init, CovarianceMode::Full, FitConfig{});
  EXPECT_GT(fit.ridged_components, 0u);
}

TEST(KMeans, CorrectInitConvergesAtOnce) {
  auto mix = blobs(5.0, {200, 200}, 6);
  auto fit = kmeans_fit(mix.x, mix.labels, 2, FitConfig{});
  EXPECT_TRUE(fit.converged);
  ASSERT_LE(fit.reassignments.size(), 2u);
  EXPECT_EQ(fit.reassignments.back(), 0u);
  EXPECT_EQ(fit.labels, mix.labels);
}

TEST(KMeans, IdenticalPointsTieToLowestCluster) {
  Matrix x = Matrix::Ones(6, 3);
  auto fit = kmeans_fit(x, {0, 1, 2, 0, 1, 2}, 3, FitConfig{});
  for (int l : fit.labels) EXPECT_EQ(l, 0);
}

TEST(KMeans, EmptyClusterReseededFromFarthestPoint) {
  Matrix x(5, 1);
  x << 0, 0.1, 0.2, 10, 10.1;
  auto fit = kmeans_fit(x, {0, 0, 0, 0, 0}, 2, FitConfig{});
  EXPECT_GE(fit.reseeds, 1u);
  EXPECT_EQ(fit.labels, (std::vector<int>{0, 0, 0, 1, 1}));
}

TEST(KMeans, UnbalancedBoundaryDrifts) {
  // Lloyd's midpoint boundary ignores cluster sizes, so the large cluster's
  // tail spills into the small one more often than the reverse.
  auto mix = blobs(2.5, {100, 1900}, 7);
  auto fit = kmeans_fit(mix.x, mix.labels, 2, FitConfig{});
  auto m = compute_metrics(fit.labels, mix.labels, 2);
  EXPECT_GT(m.confusion[1][0], m.confusion[0][1]);
}

TEST(KMeans, LabelRangeChecked) {
  EXPECT_ERROR_KIND(kmeans_fit(Matrix::Ones(2, 1), {0, 3}, 2, FitConfig{}), Precondition);
}

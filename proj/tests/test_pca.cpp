#include <random>

#include "simptc/pca.hpp"
#include "test_util.hpp"

using namespace simptc;

namespace {

Matrix gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  return x;
}

}  // namespace

TEST(Pca, ExactSubspace) {
  Matrix x = gaussian(50, 3, 1) * gaussian(3, 10, 2);
  auto m = pca_fit(x, 0.03);
  EXPECT_EQ(m.rank(), 3);
  EXPECT_NEAR(m.reconstruction_error(), 0.0, 1e-12);
}

TEST(Pca, HandVariances) {
  // Uncorrelated columns with variances in ratio 9:1.
  Matrix x(4, 2);
  x << 3 * std::sqrt(0.75), 0, -3 * std::sqrt(0.75), 0, 0, std::sqrt(0.75), 0, -std::sqrt(0.75);
  auto coarse = pca_fit(x, 0.15);
  EXPECT_EQ(coarse.rank(), 1);
  EXPECT_NEAR(coarse.reconstruction_error(), 0.1, 1e-12);
  EXPECT_NEAR(coarse.explained_variance(0), 9.0 / 2, 1e-12);
  EXPECT_EQ(pca_fit(x, 0.05).rank(), 2);
}

TEST(Pca, ReconstructionWithinTarget) {
  Matrix x = gaussian(200, 4, 3) * gaussian(4, 30, 4) + 0.1 * gaussian(200, 30, 5);
  auto m = pca_fit(x);
  Matrix back = pca_reconstruct(m, pca_transform(m, x));
  Matrix c = x.rowwise() - m.mean.transpose();
  const double rel = (x - back).squaredNorm() / c.squaredNorm();
  EXPECT_LE(rel, m.target_error + 1e-12);
  EXPECT_NEAR(rel, m.reconstruction_error(), 1e-9);
}

TEST(Pca, MeanMapsToOrigin) {
  Matrix x = gaussian(40, 6, 6);
  auto m = pca_fit(x, 0.2);
  EXPECT_LE(pca_transform(m, m.mean).norm(), 1e-12);
}

TEST(Pca, MatchesDenseEigenOracle) {
  Matrix x = gaussian(8, 5, 7);
  auto m = pca_fit_rank(x, 5);
  Matrix c = x.rowwise() - x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c / 7.0);
  Matrix proj = pca_transform(m, x);
  for (int k = 0; k < 5; ++k) {
    Vector dir = es.eigenvectors().col(4 - k);
    Vector want = c * dir;
    Vector got = proj.col(k);
    const double sign = want.dot(got) < 0 ? -1.0 : 1.0;
    EXPECT_LE((sign * want - got).cwiseAbs().maxCoeff(), 1e-8) << "component " << k;
    EXPECT_NEAR(m.explained_variance(k), es.eigenvalues()(4 - k), 1e-10);
  }
}

TEST(Pca, SignConventionLargestEntryPositive) {
  auto m = pca_fit_rank(gaussian(30, 4, 8), 4);
  for (Eigen::Index k = 0; k < 4; ++k) {
    Eigen::Index arg;
    m.components.row(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(m.components(k, arg), 0.0);
  }
}

TEST(Pca, Errors) {
  EXPECT_ERROR_KIND(pca_fit(Matrix::Ones(1, 3)), InsufficientData);
  EXPECT_ERROR_KIND(pca_fit(Matrix::Ones(5, 3)), Data);
  EXPECT_ERROR_KIND(pca_fit(gaussian(5, 3, 9), 1.5), Config);
  auto m = pca_fit(gaussian(10, 3, 10));
  EXPECT_ERROR_KIND(pca_transform(m, Matrix(Matrix::Ones(2, 4))), Shape);
}

TEST(Pca, DefaultTarget) { EXPECT_EQ(kDefaultPcaTargetError, 0.03); }

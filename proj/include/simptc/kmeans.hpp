#pragma once

#include <string>
#include <vector>

#include "simptc/bgmm.hpp"
#include "simptc/types.hpp"

namespace simptc {

struct KMeansFit {
  Matrix centroids;  // d x K
  std::vector<int> labels;
  std::vector<std::size_t> reassignments;  // per iteration
  std::size_t reseeds = 0;
  bool converged = false;
};

namespace detail {

inline std::vector<int> nearest_centroid(const Matrix& x, const Matrix& centroids, Vector& best_dist) {
  std::vector<int> labels(static_cast<std::size_t>(x.rows()), 0);
  best_dist.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double best = (x.row(i).transpose() - centroids.col(0)).squaredNorm();
    int arg = 0;
    for (Eigen::Index k = 1; k < centroids.cols(); ++k) {
      const double dist = (x.row(i).transpose() - centroids.col(k)).squaredNorm();
      if (dist < best) {
        best = dist;
        arg = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    best_dist(i) = best;
  }
  return labels;
}

// Centroid update; empty clusters move to the point farthest from its
// centroid (ties: lowest row). Returns the number of reseeds.
inline std::size_t update_centroids(const Matrix& x, const std::vector<int>& labels, Matrix& centroids,
                                    Vector& dist_to_own) {
  const Eigen::Index K = centroids.cols();
  Matrix sums = Matrix::Zero(x.cols(), K);
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sums.col(labels[i]) += x.row(static_cast<Eigen::Index>(i)).transpose();
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  std::size_t reseeds = 0;
  for (Eigen::Index k = 0; k < K; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) {
      centroids.col(k) = sums.col(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
      continue;
    }
    Eigen::Index far = 0;
    for (Eigen::Index i = 1; i < dist_to_own.size(); ++i)
      if (dist_to_own(i) > dist_to_own(far)) far = i;
    if (dist_to_own.size() == 0 || !(dist_to_own(far) > 0.0)) continue;  // nothing distinct to reseed from
    centroids.col(k) = x.row(far).transpose();
    dist_to_own(far) = 0.0;
    ++reseeds;
  }
  return reseeds;
}

}  // namespace detail

/// Lloyd's algorithm seeded with the class means of `init_labels`.
inline KMeansFit kmeans_fit(const Matrix& x, const std::vector<int>& init_labels, int num_clusters, const FitConfig& config) {
  config.validate();
  if (init_labels.size() != static_cast<std::size_t>(x.rows()))
    throw Error(ErrorKind::Shape, "init labels length does not match the data");
  for (int l : init_labels)
    if (l < 0 || l >= num_clusters) throw Error(ErrorKind::Precondition, "init label out of range");

  KMeansFit fit;
  fit.centroids = Matrix::Zero(x.cols(), num_clusters);
  std::vector<int> previous = init_labels;

  // Distances to the initial class means drive the reseed of empty classes.
  Vector dist(x.rows());
  {
    Matrix sums = Matrix::Zero(x.cols(), num_clusters);
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_clusters), 0);
    for (std::size_t i = 0; i < init_labels.size(); ++i) {
      sums.col(init_labels[i]) += x.row(static_cast<Eigen::Index>(i)).transpose();
      ++counts[static_cast<std::size_t>(init_labels[i])];
    }
    for (int k = 0; k < num_clusters; ++k)
      if (counts[static_cast<std::size_t>(k)]) fit.centroids.col(k) = sums.col(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      dist(i) = (x.row(i).transpose() - fit.centroids.col(init_labels[static_cast<std::size_t>(i)])).squaredNorm();
    fit.reseeds += detail::update_centroids(x, init_labels, fit.centroids, dist);
  }

  for (int it = 1; it <= config.max_iter; ++it) {
    auto labels = detail::nearest_centroid(x, fit.centroids, dist);
    const std::size_t changes = count_changes(labels, previous);
    fit.reassignments.push_back(changes);
    const std::size_t reseeds = detail::update_centroids(x, labels, fit.centroids, dist);
    fit.reseeds += reseeds;
    fit.labels = labels;
    if (changes == 0 && reseeds == 0) {
      fit.converged = true;
      break;
    }
    previous = std::move(labels);
  }
  return fit;
}

}  // namespace simptc

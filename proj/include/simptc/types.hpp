#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "simptc/error.hpp"

namespace simptc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using FloatRowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N x d sentence embeddings, one row per text, stored in the on-disk
/// single-precision layout so that a save/load cycle is lossless.
struct EmbeddingMatrix {
  FloatRowMatrix values;

  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(FloatRowMatrix v) : values(std::move(v)) {}

  static EmbeddingMatrix from_real(const Matrix& m) {
    return EmbeddingMatrix(m.cast<float>());
  }

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

  Matrix to_real() const { return values.cast<double>(); }

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) return false;
    return std::equal(a.values.data(), a.values.data() + a.values.size(), b.values.data(),
                      [](float x, float y) {
                        return std::bit_cast<std::uint32_t>(x) == std::bit_cast<std::uint32_t>(y);
                      });
  }
};

enum class Split { Train, Test };

struct LabeledDataset {
  EmbeddingMatrix embeddings;
  std::vector<std::string> ids;
  std::vector<std::optional<int>> gold_labels;  // empty entries for unlabeled rows
  std::vector<Split> splits;

  std::size_t size() const { return ids.size(); }

  bool fully_labeled() const {
    return !gold_labels.empty() &&
           std::all_of(gold_labels.begin(), gold_labels.end(), [](const auto& g) { return g.has_value(); });
  }

  std::vector<std::size_t> rows_in(Split split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < splits.size(); ++i)
      if (splits[i] == split) out.push_back(i);
    return out;
  }
};

struct WordVectorTable {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::size_t> index;
  FloatRowMatrix vectors;
  std::vector<std::string> warnings;

  std::size_t size() const { return tokens.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }

  std::optional<std::size_t> find(const std::string& token) const {
    auto it = index.find(token);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

struct ClassSpec {
  int class_id = 0;
  std::string label;               // gold-label string used in dataset records
  std::vector<std::string> names;  // m >= 1 class names
  std::vector<std::string> expanded;
};

struct Assignment {
  std::vector<int> labels;
  Matrix scores;  // N x K, may be empty

  std::size_t size() const { return labels.size(); }
};

inline void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        throw Error(ErrorKind::Data, std::string(what) + " has a non-finite entry at (" + std::to_string(i) +
                                         "," + std::to_string(j) + ")");
}

inline std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> labels(static_cast<std::size_t>(scores.rows()), 0);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < scores.cols(); ++k)
      if (scores(i, k) > scores(i, best)) best = k;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

inline Matrix select_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace simptc

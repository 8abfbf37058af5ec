#pragma once

// Fitted-model file: one JSON header line, then two SPTC blobs.
//   line 1   {"format":"simptc-bgmm","version":1,"covariance":..,"components":K,"dim":d,
//             "alpha":[..],"beta":[..],"nu":[..],"elbo_history":[..],...}
//   blob 1   K x d posterior means m_k
//   blob 2   (P*d) x d lower Cholesky factors of the inverse Wishart scales
//            W_k^{-1}, stacked; P = K (full) or 1 (tied)
// Matrices are single precision on disk; scalars keep full double precision.

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "simptc/bgmm.hpp"
#include "simptc/io.hpp"

namespace simptc {

inline void save_model(const VariationalState& st, const std::filesystem::path& path, const nlohmann::json& extra = {}) {
  const int K = st.num_components();
  const Eigen::Index d = st.dim();
  nlohmann::json h;
  h["format"] = "simptc-bgmm";
  h["version"] = 1;
  h["covariance"] = to_string(st.mode);
  h["components"] = K;
  h["dim"] = d;
  h["alpha"] = std::vector<double>(st.alpha.data(), st.alpha.data() + K);
  h["beta"] = std::vector<double>(st.beta.data(), st.beta.data() + K);
  std::vector<double> nu;
  for (const auto& p : st.precisions) nu.push_back(p.nu);
  h["nu"] = nu;
  h["elbo_history"] = st.elbo_history;
  if (!extra.is_null()) h["fit"] = extra;

  Matrix chol(static_cast<Eigen::Index>(st.precisions.size()) * d, d);
  for (std::size_t p = 0; p < st.precisions.size(); ++p)
    chol.middleRows(static_cast<Eigen::Index>(p) * d, d) = st.precisions[p].scale_inv_chol;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write model " + path.string());
  out << h.dump() << '\n';
  write_sptc(out, EmbeddingMatrix::from_real(st.means.transpose()));
  write_sptc(out, EmbeddingMatrix::from_real(chol));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

inline VariationalState load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open model " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Format, path.string() + ": missing model header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
  if (h.value("format", "") != "simptc-bgmm") throw Error(ErrorKind::Format, path.string() + ": not a simptc model");
  VariationalState st;
  st.mode = parse_covariance_mode(h.at("covariance").get<std::string>());
  const int K = h.at("components").get<int>();
  const auto d = h.at("dim").get<Eigen::Index>();
  auto alpha = h.at("alpha").get<std::vector<double>>();
  auto beta = h.at("beta").get<std::vector<double>>();
  auto nu = h.at("nu").get<std::vector<double>>();
  const std::size_t P = st.mode == CovarianceMode::Full ? static_cast<std::size_t>(K) : 1;
  if (alpha.size() != static_cast<std::size_t>(K) || beta.size() != static_cast<std::size_t>(K) || nu.size() != P)
    throw Error(ErrorKind::Format, path.string() + ": scalar arrays disagree with component count");
  st.alpha = Eigen::Map<Vector>(alpha.data(), K);
  st.beta = Eigen::Map<Vector>(beta.data(), K);
  st.elbo_history = h.value("elbo_history", std::vector<double>{});

  Matrix means = read_sptc(in, path.string() + " (means)").to_real();
  Matrix chol = read_sptc(in, path.string() + " (factors)").to_real();
  if (means.rows() != K || means.cols() != d || chol.rows() != static_cast<Eigen::Index>(P) * d || chol.cols() != d)
    throw Error(ErrorKind::Format, path.string() + ": matrix shapes disagree with the header");
  st.means = means.transpose();
  for (std::size_t p = 0; p < P; ++p) {
    Matrix l = chol.middleRows(static_cast<Eigen::Index>(p) * d, d).triangularView<Eigen::Lower>();
    st.precisions.push_back({std::move(l), nu[p]});
  }
  return st;
}

}  // namespace simptc

#pragma once

// Clustering-algorithm comparison from a shared cosine-match initialization.

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "simptc/anchors.hpp"
#include "simptc/bgmm.hpp"
#include "simptc/gmm.hpp"
#include "simptc/kmeans.hpp"
#include "simptc/metrics.hpp"
#include "simptc/stats.hpp"

namespace simptc {

enum class Algorithm { KMeans, Gmm, Bgmm };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::KMeans: return "kmeans";
    case Algorithm::Gmm: return "gmm";
    case Algorithm::Bgmm: return "bgmm";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "kmeans") return Algorithm::KMeans;
  if (s == "gmm") return Algorithm::Gmm;
  if (s == "bgmm") return Algorithm::Bgmm;
  throw Error(ErrorKind::Config, "unknown algorithm '" + s + "' (expected kmeans, gmm or bgmm)");
}

struct AblationOptions {
  FitConfig fit;
  CovarianceMode mode = CovarianceMode::Full;
  std::optional<double> alpha0;  // defaults to N/K
};

struct AblationRow {
  Algorithm algorithm = Algorithm::Bgmm;
  std::optional<Metrics> metrics;
  std::string error;
  std::size_t iterations = 0;
};

struct AblationTable {
  Metrics init_metrics;  // cosine-match initialization, scored directly
  std::vector<AblationRow> rows;
};

/// Rows scored by the ablation: the test split when present, else every row.
inline std::vector<std::size_t> evaluation_rows(const LabeledDataset& ds) {
  auto rows = ds.rows_in(Split::Test);
  if (rows.empty()) {
    rows.resize(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  return rows;
}

inline std::vector<int> gold_for(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
  std::vector<int> gold;
  gold.reserve(rows.size());
  for (auto r : rows) {
    if (r >= ds.gold_labels.size() || !ds.gold_labels[r])
      throw Error(ErrorKind::Label, "row " + ds.ids[r] + " has no gold label");
    gold.push_back(*ds.gold_labels[r]);
  }
  return gold;
}

inline std::vector<int> pick(const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

/// Each algorithm is fitted on every row from the same initialization; a
/// failure is recorded in its row and the others still run. BGMM is scored
/// directly, K-Means and GMM after optimal label alignment.
inline AblationTable run_ablation(const LabeledDataset& ds, const std::vector<Vector>& anchors,
                                  const std::vector<Algorithm>& algorithms, const AblationOptions& options) {
  const Matrix x = ds.embeddings.to_real();
  const int K = static_cast<int>(anchors.size());
  const auto eval_rows = evaluation_rows(ds);
  const auto gold = gold_for(ds, eval_rows);

  AblationTable table;
  const Assignment init = match_assign(x, anchors);
  table.init_metrics = compute_metrics(pick(init.labels, eval_rows), gold, K);
  if (algorithms.empty()) return table;
  const Matrix init_resp = init_from_assignment(init.labels, K).responsibilities;

  for (Algorithm algo : algorithms) {
    AblationRow row;
    row.algorithm = algo;
    try {
      std::vector<int> labels;
      switch (algo) {
        case Algorithm::Bgmm: {
          auto priors = Priors::noninformative(ds.size(), K, compute_sigma_init(x).covariance);
          if (options.alpha0) priors.alpha0 = *options.alpha0;
          auto fit = bgmm_fit(x, init_resp, priors, options.mode, options.fit);
          row.iterations = fit.log.size();
          labels = std::move(fit.labels);
          row.metrics = compute_metrics(pick(labels, eval_rows), gold, K);
          break;
        }
        case Algorithm::Gmm: {
          auto fit = gmm_fit(x, init_resp, options.mode, options.fit);
          row.iterations = fit.log.size();
          auto aligned = align_labels(pick(fit.labels, eval_rows), gold, K);
          row.metrics = compute_metrics(aligned.labels, gold, K);
          break;
        }
        case Algorithm::KMeans: {
          auto fit = kmeans_fit(x, init.labels, K, options.fit);
          row.iterations = fit.reassignments.size();
          auto aligned = align_labels(pick(fit.labels, eval_rows), gold, K);
          row.metrics = compute_metrics(aligned.labels, gold, K);
          break;
        }
      }
    } catch (const Error& e) {
      row.error = e.what();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline nlohmann::json to_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},
          {"micro_f1", m.micro_f1},
          {"macro_f1", m.macro_f1},
          {"per_class_f1", m.per_class_f1},
          {"confusion", m.confusion}};
}

inline nlohmann::json to_json(const AblationTable& t) {
  nlohmann::json j;
  j["encode_match"] = to_json(t.init_metrics);
  j["algorithms"] = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = {{"algorithm", to_string(r.algorithm)}, {"iterations", r.iterations}};
    if (r.metrics) row["metrics"] = to_json(*r.metrics);
    else row["error"] = r.error;
    j["algorithms"].push_back(row);
  }
  return j;
}

inline std::string format_table(const AblationTable& t) {
  std::ostringstream os;
  os << std::left << std::setw(14) << "algorithm" << std::right << std::setw(10) << "accuracy" << std::setw(10)
     << "macro-F1" << std::setw(8) << "iters" << '\n';
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(14) << "encode&match" << std::right << std::setw(10) << t.init_metrics.accuracy
     << std::setw(10) << t.init_metrics.macro_f1 << std::setw(8) << "-" << '\n';
  for (const auto& r : t.rows) {
    os << std::left << std::setw(14) << to_string(r.algorithm) << std::right;
    if (r.metrics) os << std::setw(10) << r.metrics->accuracy << std::setw(10) << r.metrics->macro_f1;
    else os << std::setw(20) << "failed";
    os << std::setw(8) << r.iterations << '\n';
    if (!r.metrics) os << "  " << r.error << '\n';
  }
  return os.str();
}

}  // namespace simptc

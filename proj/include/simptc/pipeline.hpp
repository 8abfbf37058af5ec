#pragma once

// End-to-end run: expand -> render -> match -> (pca) -> fit -> predict -> eval.
// Every stage writes a file into the output directory that the matching CLI
// subcommand can consume, so a run can be resumed at any stage boundary.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "simptc/ablation.hpp"
#include "simptc/anchors.hpp"
#include "simptc/bgmm.hpp"
#include "simptc/config.hpp"
#include "simptc/expansion.hpp"
#include "simptc/io.hpp"
#include "simptc/metrics.hpp"
#include "simptc/model_io.hpp"
#include "simptc/pca.hpp"
#include "simptc/stats.hpp"

namespace simptc {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

inline nlohmann::json expansion_to_json(const std::vector<ClassSpec>& classes) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& c : classes) j[std::to_string(c.class_id)] = c.expanded;
  return j;
}

/// Reads an `expand` output ({"0": [...], "1": [...]}) back into class specs.
inline std::vector<ClassSpec> expansion_from_json(const nlohmann::json& j) {
  std::vector<ClassSpec> classes(j.size());
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto id = std::stoul(it.key());
    if (id >= classes.size()) throw Error(ErrorKind::Format, "expansion class ids must be 0..K-1");
    classes[id].class_id = static_cast<int>(id);
    classes[id].expanded = it.value().get<std::vector<std::string>>();
  }
  return classes;
}

inline std::string rendered_to_jsonl(const std::vector<std::vector<std::string>>& rendered) {
  std::string out;
  for (std::size_t c = 0; c < rendered.size(); ++c)
    for (const auto& s : rendered[c]) out += nlohmann::json{{"class_id", c}, {"sentence", s}}.dump() + "\n";
  return out;
}

inline std::string match_to_jsonl(const std::vector<std::string>& ids, const Assignment& a) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<double> scores(a.scores.cols());
    for (Eigen::Index k = 0; k < a.scores.cols(); ++k) scores[static_cast<std::size_t>(k)] = a.scores(static_cast<Eigen::Index>(i), k);
    out += nlohmann::json{{"id", ids[i]}, {"label", a.labels[i]}, {"scores", scores}}.dump() + "\n";
  }
  return out;
}

inline std::string predictions_to_jsonl(const std::vector<std::string>& ids, const Assignment& a) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double top = a.scores.rows() ? a.scores.row(static_cast<Eigen::Index>(i)).maxCoeff() : 1.0;
    out += nlohmann::json{{"id", ids[i]}, {"label", a.labels[i]}, {"max_responsibility", top}}.dump() + "\n";
  }
  return out;
}

/// Reads {"id", "label"} JSONL (match or predict output), keyed by id.
inline std::map<std::string, int> read_label_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::map<std::string, int> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      out[j.at("id").get<std::string>()] = j.at("label").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline std::vector<int> labels_for_ids(const std::map<std::string, int>& by_id, const std::vector<std::string>& ids,
                                       const std::string& source) {
  std::vector<int> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::Alignment, source + " has no label for id '" + id + "'");
    out.push_back(it->second);
  }
  return out;
}

/// JSONL of {id, coords, label?, pred?} for plotting.
inline std::string projection_to_jsonl(const std::vector<std::string>& ids, const Matrix& coords,
                                       const std::vector<std::optional<int>>& gold, const std::vector<int>& pred) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::vector<double> c(static_cast<std::size_t>(coords.cols()));
    for (Eigen::Index j = 0; j < coords.cols(); ++j) c[static_cast<std::size_t>(j)] = coords(static_cast<Eigen::Index>(i), j);
    nlohmann::json j = {{"id", ids[i]}, {"coords", c}};
    if (i < gold.size() && gold[i]) j["label"] = *gold[i];
    if (i < pred.size()) j["pred"] = pred[i];
    out += j.dump() + "\n";
  }
  return out;
}

/// Projects a dataset onto a fixed 2-d or 3-d PCA basis.
inline Matrix emit_projection(const LabeledDataset& ds, const PcaModel& model, int dims) {
  if (dims != 2 && dims != 3) throw Error(ErrorKind::Config, "--dims must be 2 or 3, got " + std::to_string(dims));
  if (model.rank() < dims) throw Error(ErrorKind::Config, "PCA model keeps fewer than " + std::to_string(dims) + " components");
  return pca_transform(model, ds.embeddings.to_real()).leftCols(dims);
}

struct PipelineResult {
  std::optional<Metrics> metrics;
  std::vector<int> test_predictions;
  std::filesystem::path output_dir;
  std::vector<std::string> warnings;
};

namespace detail {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace detail

inline PipelineResult run_pipeline(const ExperimentConfig& config) {
  PipelineResult result;
  const auto& out = config.output_dir;
  result.output_dir = out;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + out.string() + ": " + ec.message());
  const int K = static_cast<int>(config.classes.size());

  auto classes = detail::stage("expand", [&] {
    std::vector<ClassSpec> cls = config.classes;
    if (config.word_vectors) {
      auto table = load_word_vectors(*config.word_vectors);
      for (auto& w : table.warnings) result.warnings.push_back(w);
      auto expanded = expand_class_names(table, std::move(cls), config.expansion);
      for (auto& w : expanded.warnings) result.warnings.push_back(w);
      cls = std::move(expanded.classes);
    } else {
      for (auto& c : cls) {
        c.expanded.clear();
        for (const auto& n : c.names) c.expanded.push_back(normalize_token(n));
      }
    }
    write_text(out / "expansion.json", expansion_to_json(cls).dump(2) + "\n");
    return cls;
  });

  const auto rendered_path = out / "anchor_sentences.jsonl";
  auto rendered = detail::stage("render", [&] {
    std::vector<Template> templates;
    for (const auto& t : config.templates) templates.emplace_back(t);
    auto r = render_anchor_sentences(templates, classes);
    write_text(rendered_path, rendered_to_jsonl(r));
    return r;
  });

  auto ds = detail::stage("load", [&] { return load_dataset(config.texts, config.embeddings, config.class_labels()); });
  Matrix x = ds.embeddings.to_real();

  auto anchor_set = detail::stage("match", [&] {
    if (!std::filesystem::exists(config.anchors))
      throw Error(ErrorKind::Io, "anchor embeddings manifest " + config.anchors.string() +
                                     " does not exist. Embed the rendered anchor sentences in " + rendered_path.string() +
                                     " first, e.g. `embed --model <checkpoint> --in " + rendered_path.string() +
                                     " --out " + config.anchors.parent_path().string() + "`, then rerun.");
    auto set = load_anchor_set(config.anchors);
    if (static_cast<int>(set.num_classes()) != K)
      throw Error(ErrorKind::Shape, "class-count mismatch: config has " + std::to_string(K) + " classes, anchor manifest has " +
                                        std::to_string(set.num_classes()));
    for (std::size_t c = 0; c < set.sentence_embeddings.size(); ++c)
      if (static_cast<std::size_t>(set.sentence_embeddings[c].rows()) != rendered[c].size())
        result.warnings.push_back("class " + std::to_string(c) + ": " + std::to_string(set.sentence_embeddings[c].rows()) +
                                  " anchor embeddings for " + std::to_string(rendered[c].size()) + " rendered sentences");
    return set;
  });
  std::vector<Vector> anchors = anchor_set.anchor_vectors;

  if (config.pca_target_error) {
    detail::stage("pca", [&] {
      auto model = pca_fit(x, *config.pca_target_error);
      x = pca_transform(model, x);
      for (auto& a : anchors) a = pca_transform(model, a);
      save_embeddings(EmbeddingMatrix::from_real(x), out / "embeddings.pca.sptc");
      return 0;
    });
  }

  auto init = detail::stage("match", [&] {
    auto a = match_assign(x, anchors);
    write_text(out / "match.jsonl", match_to_jsonl(ds.ids, a));
    return a;
  });

  auto fit = detail::stage("fit", [&] {
    auto start = init_from_assignment(init.labels, K);
    for (auto& w : start.warnings) result.warnings.push_back(w);
    auto priors = Priors::noninformative(ds.size(), K, compute_sigma_init(x).covariance);
    if (config.alpha0) priors.alpha0 = *config.alpha0;
    auto f = bgmm_fit(x, start.responsibilities, priors, config.mode, config.fit);
    std::string log;
    for (const auto& r : f.log)
      log += nlohmann::json{{"iteration", r.iteration}, {"elbo_surrogate", r.objective}, {"label_changes", r.label_changes}}.dump() + "\n";
    write_text(out / "fit_log.jsonl", log);
    save_model(f.state, out / "model.bin",
               {{"max_iter", config.fit.max_iter}, {"alpha0", priors.alpha0}, {"seed", config.fit.seed},
                {"converged", f.converged}});
    return f;
  });

  const auto eval_rows = evaluation_rows(ds);
  detail::stage("predict", [&] {
    auto a = predict(fit.state, select_rows(x, eval_rows));
    std::vector<std::string> ids;
    for (auto r : eval_rows) ids.push_back(ds.ids[r]);
    write_text(out / "assignments.jsonl", predictions_to_jsonl(ids, a));
    result.test_predictions = a.labels;
    return 0;
  });

  bool labeled = true;
  for (auto r : eval_rows) labeled = labeled && ds.gold_labels[r].has_value();
  if (labeled && !eval_rows.empty()) {
    detail::stage("eval", [&] {
      auto m = compute_metrics(result.test_predictions, gold_for(ds, eval_rows), K);
      nlohmann::json j = to_json(m);
      j["encode_match"] = to_json(compute_metrics(pick(init.labels, eval_rows), gold_for(ds, eval_rows), K));
      j["iterations"] = fit.log.size();
      j["converged"] = fit.converged;
      write_text(out / "metrics.json", j.dump(2) + "\n");
      result.metrics = m;
      return 0;
    });
  }

  nlohmann::json manifest;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(config.source.dump())));
  manifest["config_hash"] = hash;
  manifest["version"] = kVersion;
  manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
  manifest["covariance"] = to_string(config.mode);
  manifest["rows"] = ds.size();
  manifest["classes"] = K;
  manifest["warnings"] = result.warnings;
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace simptc

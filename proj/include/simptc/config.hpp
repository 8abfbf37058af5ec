#pragma once

// Experiment configuration: a single JSON document, unknown keys rejected.
//
// {
//   "preset": "agnews",                       // optional, see presets()
//   "dataset": {"texts": "data.jsonl", "embeddings": "data.sptc"},
//   "classes": [{"label": "sports", "names": ["sports", "athletics"]}, "politics"],
//   "templates": ["The news is about <mask>."],
//   "word_vectors": "numberbatch.txt",       // optional; no expansion without it
//   "expansion": {"tokens_per_class": 1000, "include_original_names": true},
//   "anchors": "anchors/manifest.json",
//   "covariance": "full" | "tied",
//   "max_iter": 50,
//   "label_change_tolerance": 0,
//   "alpha0": null,                            // default N/K
//   "pca_target_error": null,                  // e.g. 0.03 to enable PCA
//   "seed": 0,
//   "output_dir": "out"
// }
// Relative paths resolve against the directory holding the config file.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "simptc/anchors.hpp"
#include "simptc/bgmm.hpp"
#include "simptc/expansion.hpp"
#include "simptc/types.hpp"

namespace simptc {

struct Preset {
  CovarianceMode mode;
  int max_iter;
  std::vector<std::string> templates;
};

/// Per-dataset defaults: iteration caps, covariance sharing and the four
/// hand-written templates of each benchmark.
inline const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> table = {
      {"agnews",
       {CovarianceMode::Full, 50,
        {"The news is about <mask>.", "The news is related to <mask>.", "<mask> is the topic of the news.",
         "This week's news is about <mask>."}}},
      {"dbpedia",
       {CovarianceMode::Full, 40,
        {"The object is about <mask>.", "The object is related to <mask>.", "<mask> is the topic of the object.",
         "<mask> is the subject of the object."}}},
      {"yahoo",
       {CovarianceMode::Full, 20,
        {"The answer is about <mask>.", "The answer is related to <mask>.", "<mask> is the topic of the answer.",
         "<mask> is involved in the answer."}}},
      {"amazon",
       {CovarianceMode::Tied, 50,
        {"A <mask> product review.", "The product review is <mask>.", "The reviewer found the product <mask>.",
         "The product is <mask>."}}},
      {"imdb",
       {CovarianceMode::Tied, 150,
        {"A <mask> movie review.", "The movie review is <mask>.", "The reviewer found the movie <mask>.",
         "The movie is <mask>."}}},
  };
  return table;
}

struct ExperimentConfig {
  std::filesystem::path texts;
  std::filesystem::path embeddings;
  std::optional<std::filesystem::path> word_vectors;
  std::vector<ClassSpec> classes;
  std::vector<std::string> templates;
  ExpansionConfig expansion;
  std::filesystem::path anchors;
  CovarianceMode mode = CovarianceMode::Full;
  FitConfig fit;
  std::optional<double> alpha0;
  std::optional<double> pca_target_error;
  std::filesystem::path output_dir = "out";
  nlohmann::json source;  // the parsed document, for hashing

  std::vector<std::string> class_labels() const {
    std::vector<std::string> out;
    for (const auto& c : classes) out.push_back(c.label);
    return out;
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.contains(it.key())) throw Error(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() ? base / path : path;
}

}  // namespace detail

inline std::vector<ClassSpec> parse_classes(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorKind::Config, "'classes' must be a non-empty array");
  std::vector<ClassSpec> classes;
  for (std::size_t i = 0; i < j.size(); ++i) {
    ClassSpec c;
    c.class_id = static_cast<int>(i);
    const auto& e = j[i];
    if (e.is_string()) {
      c.names = {e.get<std::string>()};
    } else if (e.is_object()) {
      detail::reject_unknown(e, {"label", "names"}, "class entry " + std::to_string(i));
      if (!e.contains("names")) throw Error(ErrorKind::Config, "class entry " + std::to_string(i) + " needs 'names'");
      c.names = e["names"].get<std::vector<std::string>>();
      if (e.contains("label")) c.label = e["label"].get<std::string>();
    } else {
      throw Error(ErrorKind::Config, "class entry " + std::to_string(i) + " must be a string or object");
    }
    if (c.names.empty()) throw Error(ErrorKind::Config, "class entry " + std::to_string(i) + " has no names");
    if (c.label.empty()) c.label = c.names.front();
    classes.push_back(std::move(c));
  }
  return classes;
}

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    if (!j.is_object()) throw Error(ErrorKind::Config, "config must be a JSON object");
    detail::reject_unknown(j,
                           {"preset", "dataset", "classes", "templates", "word_vectors", "expansion", "anchors",
                            "covariance", "max_iter", "label_change_tolerance", "alpha0", "pca_target_error", "seed",
                            "output_dir"},
                           "config");
    ExperimentConfig c;
    c.source = j;
    if (j.contains("preset")) {
      const auto name = j["preset"].get<std::string>();
      auto it = presets().find(name);
      if (it == presets().end()) throw Error(ErrorKind::Config, "unknown preset '" + name + "'");
      c.mode = it->second.mode;
      c.fit.max_iter = it->second.max_iter;
      c.templates = it->second.templates;
    }
    if (!j.contains("dataset")) throw Error(ErrorKind::Config, "missing 'dataset'");
    const auto& ds = j["dataset"];
    detail::reject_unknown(ds, {"texts", "embeddings"}, "dataset");
    c.texts = detail::resolve(base_dir, ds.at("texts").get<std::string>());
    c.embeddings = detail::resolve(base_dir, ds.at("embeddings").get<std::string>());
    if (!j.contains("classes")) throw Error(ErrorKind::Config, "missing 'classes'");
    c.classes = parse_classes(j["classes"]);
    if (j.contains("templates")) c.templates = j["templates"].get<std::vector<std::string>>();
    if (c.templates.empty()) throw Error(ErrorKind::Config, "at least one template is required");
    if (j.contains("word_vectors") && !j["word_vectors"].is_null())
      c.word_vectors = detail::resolve(base_dir, j["word_vectors"].get<std::string>());
    if (j.contains("expansion")) {
      const auto& e = j["expansion"];
      detail::reject_unknown(e, {"tokens_per_class", "include_original_names"}, "expansion");
      c.expansion.tokens_per_class = e.value("tokens_per_class", c.expansion.tokens_per_class);
      c.expansion.include_original_names = e.value("include_original_names", c.expansion.include_original_names);
    }
    if (!j.contains("anchors")) throw Error(ErrorKind::Config, "missing 'anchors' manifest path");
    c.anchors = detail::resolve(base_dir, j["anchors"].get<std::string>());
    if (j.contains("covariance")) c.mode = parse_covariance_mode(j["covariance"].get<std::string>());
    if (j.contains("max_iter")) c.fit.max_iter = j["max_iter"].get<int>();
    if (j.contains("label_change_tolerance")) c.fit.label_change_tolerance = j["label_change_tolerance"].get<int>();
    if (j.contains("alpha0") && !j["alpha0"].is_null()) c.alpha0 = j["alpha0"].get<double>();
    if (j.contains("pca_target_error") && !j["pca_target_error"].is_null())
      c.pca_target_error = j["pca_target_error"].get<double>();
    if (j.contains("seed")) c.fit.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = detail::resolve(base_dir, j["output_dir"].get<std::string>());
    else c.output_dir = base_dir / "out";
    c.fit.validate();
    for (const auto& t : c.templates) (void)Template(t);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return parse_config(j, path.parent_path());
}

}  // namespace simptc

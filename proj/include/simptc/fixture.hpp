#pragma once

// Writes a small, fully synthetic experiment directory: word vectors, a
// labeled dataset with embeddings, per-class anchor embeddings standing in
// for the language-model encoder, and a config tying them together.

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "simptc/anchors.hpp"
#include "simptc/expansion.hpp"
#include "simptc/io.hpp"
#include "simptc/pipeline.hpp"
#include "simptc/synthetic.hpp"

namespace simptc::synthetic {

struct FixtureOptions {
  std::uint64_t seed = 7;
  Eigen::Index dim = 8;
  std::size_t points_per_class = 120;
  double test_fraction = 0.3;
};

inline std::filesystem::path write_fixture(const std::filesystem::path& dir, const FixtureOptions& opt = {}) {
  std::filesystem::create_directories(dir / "anchors");
  std::mt19937_64 rng(opt.seed);
  const std::vector<std::string> labels = {"sports", "politics", "science"};
  const std::vector<std::vector<std::string>> related = {
      {"sports", "football", "tennis", "athletics"},
      {"politics", "election", "policy_making", "parliament"},
      {"science", "physics", "biology", "chemistry"}};
  const int K = static_cast<int>(labels.size());
  const Eigen::Index d = opt.dim;

  // Word vectors: related tokens share a direction; a few neutral distractors.
  {
    std::normal_distribution<double> noise(0.0, 0.05);
    std::string text = std::to_string(K * 4 + 2) + " 4\n";
    auto emit = [&](const std::string& tok, int axis) {
      text += tok;
      for (int j = 0; j < 4; ++j) {
        const double v = (j == axis ? 1.0 : 0.0) + noise(rng);
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.6f", v);
        text += buf;
      }
      text += "\n";
    };
    for (int k = 0; k < K; ++k)
      for (const auto& tok : related[static_cast<std::size_t>(k)]) emit(tok, k);
    emit("the", 3);
    emit("of", 3);
    write_text(dir / "word_vectors.txt", text);
  }

  // Texts: one Gaussian blob per class around a scaled basis direction.
  Matrix means = Matrix::Zero(d, K);
  for (int k = 0; k < K; ++k) {
    means(k, k) = 4.0;
    means.col(k).array() += 1.0;
  }
  std::vector<Matrix> factors(static_cast<std::size_t>(K), 0.6 * Matrix::Identity(d, d));
  auto mix = sample(means, factors, std::vector<std::size_t>(static_cast<std::size_t>(K), opt.points_per_class), rng);
  std::vector<std::size_t> order(mix.labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  Matrix x(mix.x.rows(), d);
  std::string records;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = mix.x.row(static_cast<Eigen::Index>(order[i]));
    char id[32];
    std::snprintf(id, sizeof id, "doc%04zu", i);
    records += nlohmann::json{{"id", id},
                              {"label", labels[static_cast<std::size_t>(mix.labels[order[i]])]},
                              {"split", unit(rng) < opt.test_fraction ? "test" : "train"}}
                   .dump() +
               "\n";
  }
  write_text(dir / "texts.jsonl", records);
  save_embeddings(EmbeddingMatrix::from_real(x), dir / "texts.sptc");

  // Anchors: as many rows as the pipeline will render, scattered around the
  // class direction.
  const std::vector<std::string> templates = {"The text is about <mask>.", "<mask>"};
  auto table = load_word_vectors(dir / "word_vectors.txt");
  std::vector<ClassSpec> classes;
  for (int k = 0; k < K; ++k) classes.push_back({k, labels[static_cast<std::size_t>(k)], {labels[static_cast<std::size_t>(k)]}, {}});
  ExpansionConfig ecfg;
  ecfg.tokens_per_class = 3;
  auto expanded = expand_class_names(table, classes, ecfg);
  std::vector<Template> tpl;
  for (const auto& t : templates) tpl.emplace_back(t);
  auto rendered = render_anchor_sentences(tpl, expanded.classes);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Matrix> per_class;
  for (int k = 0; k < K; ++k) {
    Matrix a(static_cast<Eigen::Index>(rendered[static_cast<std::size_t>(k)].size()), d);
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index j = 0; j < d; ++j) a(r, j) = (j == k ? 3.0 : 0.5) + noise(rng);
    per_class.push_back(a);
  }
  save_anchor_set(make_anchor_set(per_class), dir / "anchors" / "manifest.json");

  nlohmann::json config = {{"dataset", {{"texts", "texts.jsonl"}, {"embeddings", "texts.sptc"}}},
                           {"classes", labels},
                           {"templates", templates},
                           {"word_vectors", "word_vectors.txt"},
                           {"expansion", {{"tokens_per_class", 3}, {"include_original_names", true}}},
                           {"anchors", "anchors/manifest.json"},
                           {"covariance", "full"},
                           {"max_iter", 50},
                           {"seed", opt.seed},
                           {"output_dir", "out"}};
  write_text(dir / "config.json", config.dump(2) + "\n");
  return dir / "config.json";
}

}  // namespace simptc::synthetic

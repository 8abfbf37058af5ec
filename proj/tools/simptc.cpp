// simptc command-line interface.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "simptc/fixture.hpp"
#include "simptc/simptc.hpp"

namespace fs = std::filesystem;
using namespace simptc;

namespace {

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") std::cout << text;
  else write_text(out_path, text);
}

void warn(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

// Classes come either from an experiment config or a bare class array.
std::vector<ClassSpec> read_classes(const fs::path& path) {
  auto j = read_json(path);
  if (j.is_object() && j.contains("classes")) return parse_classes(j["classes"]);
  return parse_classes(j);
}

std::vector<std::string> read_ids(const std::string& dataset, std::size_t rows) {
  std::vector<std::string> ids;
  if (dataset.empty()) {
    for (std::size_t i = 0; i < rows; ++i) ids.push_back(std::to_string(i));
    return ids;
  }
  std::ifstream in(dataset);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + dataset);
  for (auto& r : read_dataset_records(in, dataset)) ids.push_back(r.id);
  if (ids.size() != rows)
    throw Error(ErrorKind::Alignment, dataset + " has " + std::to_string(ids.size()) + " records but the embeddings have " +
                                          std::to_string(rows) + " rows");
  return ids;
}

// Loads the config's dataset, applying its optional PCA step to texts and anchors.
std::pair<LabeledDataset, std::vector<Vector>> load_experiment(const ExperimentConfig& cfg) {
  auto ds = load_dataset(cfg.texts, cfg.embeddings, cfg.class_labels());
  auto set = load_anchor_set(cfg.anchors);
  if (set.num_classes() != cfg.classes.size())
    throw Error(ErrorKind::Shape, "class-count mismatch: config has " + std::to_string(cfg.classes.size()) +
                                      " classes, anchor manifest has " + std::to_string(set.num_classes()));
  auto anchors = set.anchor_vectors;
  if (cfg.pca_target_error) {
    auto model = pca_fit(ds.embeddings.to_real(), *cfg.pca_target_error);
    ds.embeddings = EmbeddingMatrix::from_real(pca_transform(model, ds.embeddings.to_real()));
    for (auto& a : anchors) a = pca_transform(model, a);
  }
  return {std::move(ds), std::move(anchors)};
}

std::vector<Algorithm> parse_algorithms(const std::string& list) {
  std::vector<Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_algorithm(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot text classification by clustering sentence embeddings"};
  app.require_subcommand(1);

  // expand
  auto* expand = app.add_subcommand("expand", "Expand class names with top-M word-vector neighbors");
  std::string wv_path, classes_path, out_path;
  std::size_t tokens_per_class = 1000;
  bool no_original = false;
  expand->add_option("--word-vectors", wv_path, "Word-vector text file")->required();
  expand->add_option("--classes", classes_path, "JSON class list or experiment config")->required();
  expand->add_option("-M,--tokens-per-class", tokens_per_class, "Expansion tokens per class")->capture_default_str();
  expand->add_flag("--no-original-names", no_original, "Do not re-add the original class names");
  expand->add_option("--out", out_path, "Output JSON (default stdout)");

  // anchors render / match
  auto* anchors = app.add_subcommand("anchors", "Render anchor sentences or match texts to anchors");
  anchors->require_subcommand(1);
  auto* render = anchors->add_subcommand("render", "Fill templates with expanded class names");
  std::vector<std::string> templates;
  std::string expansion_path, preset;
  render->add_option("--template", templates, "Template containing one <mask> (repeatable)");
  render->add_option("--preset", preset, "Use the templates of a dataset preset");
  render->add_option("--expansion", expansion_path, "Output of `expand`");
  render->add_option("--classes", classes_path, "Class list (names used unexpanded)");
  render->add_option("--out", out_path, "Output JSONL (default stdout)");

  auto* match = anchors->add_subcommand("match", "Assign each text to the closest anchor by cosine");
  std::string emb_path, manifest_path, dataset_path;
  match->add_option("--embeddings", emb_path, "Text embeddings (SPTC)")->required();
  match->add_option("--anchors", manifest_path, "Anchor manifest JSON")->required();
  match->add_option("--dataset", dataset_path, "Dataset JSONL providing ids");
  match->add_option("--out", out_path, "Output JSONL (default stdout)");

  // pca
  auto* pca = app.add_subcommand("pca", "Reduce embeddings with PCA");
  double target_error = kDefaultPcaTargetError;
  int dims = 0;
  std::string anchors_out;
  pca->add_option("--embeddings", emb_path, "Input embeddings (SPTC)")->required();
  pca->add_option("--target-error", target_error, "Allowed relative reconstruction error")->capture_default_str();
  pca->add_option("--dims", dims, "Fixed output dimension (2 or 3) instead of a target error");
  pca->add_option("--anchors", manifest_path, "Anchor manifest to project with the same model");
  pca->add_option("--anchors-out", anchors_out, "Where to write the projected anchor manifest");
  pca->add_option("--out", out_path, "Reduced embeddings (SPTC)")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the Bayesian GMM from an initial assignment");
  std::string init_path, cov = "full", log_path;
  int max_iter = 100, tolerance = 0, num_classes = 0;
  double alpha0 = 0.0;
  std::uint64_t seed = 0;
  fit->add_option("--embeddings", emb_path, "Fitting embeddings (SPTC)")->required();
  fit->add_option("--init", init_path, "Initial labels JSONL (output of `anchors match`)")->required();
  fit->add_option("--dataset", dataset_path, "Dataset JSONL providing ids");
  fit->add_option("--num-classes", num_classes, "K (default: 1 + largest initial label)");
  fit->add_option("--cov", cov, "Covariance mode")->check(CLI::IsMember({"full", "tied"}))->capture_default_str();
  fit->add_option("--max-iter", max_iter, "Maximum iterations T")->capture_default_str();
  fit->add_option("--tolerance", tolerance, "Label changes tolerated at convergence")->capture_default_str();
  fit->add_option("--alpha0", alpha0, "Dirichlet concentration (default N/K)");
  fit->add_option("--seed", seed, "Seed recorded with the model")->capture_default_str();
  fit->add_option("--log", log_path, "Per-iteration log JSONL");
  fit->add_option("--out", out_path, "Model file")->required();

  // predict
  auto* pred = app.add_subcommand("predict", "Predict with a fitted model");
  std::string model_path;
  bool test_only = false;
  pred->add_option("--model", model_path, "Model file")->required();
  pred->add_option("--embeddings", emb_path, "Embeddings (SPTC)")->required();
  pred->add_option("--dataset", dataset_path, "Dataset JSONL providing ids and splits");
  pred->add_flag("--test-only", test_only, "Only predict rows of the test split");
  pred->add_option("--out", out_path, "Output JSONL (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score predictions against gold labels");
  std::string pred_path;
  bool align = false;
  eval->add_option("--dataset", dataset_path, "Dataset JSONL with gold labels")->required();
  eval->add_option("--classes", classes_path, "JSON class list or experiment config")->required();
  eval->add_option("--pred", pred_path, "Predictions JSONL")->required();
  eval->add_flag("--align", align, "Align cluster ids to classes before scoring");
  eval->add_option("--out", out_path, "Output JSON (default stdout)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Compare K-Means, GMM and BGMM from one initialization");
  std::string config_path, algorithms = "kmeans,gmm,bgmm", json_out;
  ablate->add_option("--config", config_path, "Experiment config")->required();
  ablate->add_option("--algorithms", algorithms, "Comma-separated subset of kmeans,gmm,bgmm")->capture_default_str();
  ablate->add_option("--json", json_out, "Also write the table as JSON");

  // unbalance
  auto* unbalance = app.add_subcommand("unbalance", "Subsample one class, or sweep ratios through the ablation");
  int target_class = 0;
  double ratio = 1.0;
  bool sweep = false;
  std::vector<double> ratios = default_unbalance_ratios();
  std::string out_prefix;
  unbalance->add_option("--config", config_path, "Experiment config")->required();
  unbalance->add_option("--target-class", target_class, "Class to subsample")->capture_default_str();
  unbalance->add_option("--ratio", ratio, "Keep ratio for a single subsample")->capture_default_str();
  unbalance->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  unbalance->add_option("--out-prefix", out_prefix, "Write <prefix>.jsonl and <prefix>.sptc");
  unbalance->add_flag("--sweep", sweep, "Run the ablation for every ratio in --ratios");
  unbalance->add_option("--ratios", ratios, "Ratio grid for --sweep");
  unbalance->add_option("--algorithms", algorithms, "Algorithms for --sweep")->capture_default_str();
  unbalance->add_option("--out", out_path, "Sweep JSON (default stdout)");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage from one config");
  pipeline->add_option("--config", config_path, "Experiment config")->required();

  // project
  auto* project = app.add_subcommand("project", "Export 2-d/3-d PCA coordinates for plotting");
  project->add_option("--embeddings", emb_path, "Embeddings (SPTC)")->required();
  project->add_option("--dataset", dataset_path, "Dataset JSONL (ids and gold labels)");
  project->add_option("--classes", classes_path, "Class list, to map gold labels");
  project->add_option("--pred", pred_path, "Predictions JSONL to attach");
  project->add_option("--dims", dims, "2 or 3")->required();
  project->add_option("--out", out_path, "Output JSONL (default stdout)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic experiment directory");
  std::string synth_dir;
  synth->add_option("--out-dir", synth_dir, "Target directory")->required();
  synth->add_option("--seed", seed, "Generator seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*expand) {
      auto table = load_word_vectors(wv_path);
      warn(table.warnings);
      ExpansionConfig cfg{tokens_per_class, !no_original};
      auto result = expand_class_names(table, read_classes(classes_path), cfg);
      warn(result.warnings);
      emit(out_path, expansion_to_json(result.classes).dump(2) + "\n");
    } else if (*render) {
      if (!preset.empty()) {
        auto it = presets().find(preset);
        if (it == presets().end()) throw Error(ErrorKind::Config, "unknown preset '" + preset + "'");
        templates.insert(templates.end(), it->second.templates.begin(), it->second.templates.end());
      }
      if (templates.empty()) throw Error(ErrorKind::Config, "give --template or --preset");
      std::vector<ClassSpec> classes;
      if (!expansion_path.empty()) classes = expansion_from_json(read_json(expansion_path));
      else if (!classes_path.empty()) classes = read_classes(classes_path);
      else throw Error(ErrorKind::Config, "give --expansion or --classes");
      std::vector<Template> tpl;
      for (const auto& t : templates) tpl.emplace_back(t);
      emit(out_path, rendered_to_jsonl(render_anchor_sentences(tpl, classes)));
    } else if (*match) {
      auto x = load_embeddings(emb_path);
      auto set = load_anchor_set(manifest_path);
      auto ids = read_ids(dataset_path, x.rows());
      emit(out_path, match_to_jsonl(ids, match_assign(x.to_real(), set.anchor_vectors)));
    } else if (*pca) {
      Matrix x = load_embeddings(emb_path).to_real();
      PcaModel model = dims > 0 ? pca_fit_rank(x, dims) : pca_fit(x, target_error);
      save_embeddings(EmbeddingMatrix::from_real(pca_transform(model, x)), out_path);
      std::cerr << "kept " << model.rank() << " of " << model.dim() << " dimensions, reconstruction error "
                << model.reconstruction_error() << '\n';
      if (!manifest_path.empty()) {
        if (anchors_out.empty()) throw Error(ErrorKind::Config, "--anchors needs --anchors-out");
        auto set = load_anchor_set(manifest_path);
        std::vector<Matrix> projected;
        for (const auto& m : set.sentence_embeddings) projected.push_back(pca_transform(model, m));
        save_anchor_set(make_anchor_set(std::move(projected)), anchors_out);
      }
    } else if (*fit) {
      Matrix x = load_embeddings(emb_path).to_real();
      auto ids = read_ids(dataset_path, static_cast<std::size_t>(x.rows()));
      auto labels = labels_for_ids(read_label_jsonl(init_path), ids, init_path);
      int K = num_classes;
      if (K == 0)
        for (int l : labels) K = std::max(K, l + 1);
      auto start = init_from_assignment(labels, K);
      warn(start.warnings);
      auto priors = Priors::noninformative(ids.size(), K, compute_sigma_init(x).covariance);
      if (fit->count("--alpha0")) priors.alpha0 = alpha0;
      FitConfig fc;
      fc.max_iter = max_iter;
      fc.label_change_tolerance = tolerance;
      fc.seed = seed;
      auto result = bgmm_fit(x, start.responsibilities, priors, parse_covariance_mode(cov), fc);
      save_model(result.state, out_path,
                 {{"max_iter", max_iter}, {"alpha0", priors.alpha0}, {"seed", seed}, {"converged", result.converged}});
      if (!log_path.empty()) {
        std::string log;
        for (const auto& r : result.log)
          log += nlohmann::json{{"iteration", r.iteration}, {"elbo_surrogate", r.objective}, {"label_changes", r.label_changes}}.dump() + "\n";
        write_text(log_path, log);
      }
      std::cerr << (result.converged ? "converged" : "stopped at max_iter") << " after " << result.log.size()
                << " iterations\n";
    } else if (*pred) {
      auto model = load_model(model_path);
      Matrix x = load_embeddings(emb_path).to_real();
      std::vector<std::string> ids;
      std::vector<std::size_t> rows;
      if (dataset_path.empty()) {
        ids = read_ids("", static_cast<std::size_t>(x.rows()));
      } else {
        std::ifstream in(dataset_path);
        if (!in) throw Error(ErrorKind::Io, "cannot open " + dataset_path);
        auto records = read_dataset_records(in, dataset_path);
        if (records.size() != static_cast<std::size_t>(x.rows()))
          throw Error(ErrorKind::Alignment, "dataset and embeddings disagree on row count");
        for (std::size_t i = 0; i < records.size(); ++i)
          if (!test_only || records[i].split == Split::Test) {
            rows.push_back(i);
            ids.push_back(records[i].id);
          }
      }
      if (!rows.empty() || test_only) x = select_rows(x, rows);
      emit(out_path, predictions_to_jsonl(ids, predict(model, x)));
    } else if (*eval) {
      auto classes = read_classes(classes_path);
      std::vector<std::string> class_labels;
      for (const auto& c : classes) class_labels.push_back(c.label);
      std::ifstream in(dataset_path);
      if (!in) throw Error(ErrorKind::Io, "cannot open " + dataset_path);
      auto records = read_dataset_records(in, dataset_path);
      auto predicted = read_label_jsonl(pred_path);
      std::vector<int> gold, labels;
      for (const auto& r : records) {
        auto it = predicted.find(r.id);
        if (it == predicted.end()) continue;
        if (!r.label) throw Error(ErrorKind::Label, "record " + r.id + " has a prediction but no gold label");
        auto pos = std::find(class_labels.begin(), class_labels.end(), *r.label);
        if (pos == class_labels.end()) throw Error(ErrorKind::Label, "unknown label '" + *r.label + "'");
        gold.push_back(static_cast<int>(pos - class_labels.begin()));
        labels.push_back(it->second);
      }
      const int K = static_cast<int>(classes.size());
      if (align) labels = align_labels(labels, gold, K).labels;
      emit(out_path, to_json(compute_metrics(labels, gold, K)).dump(2) + "\n");
    } else if (*ablate) {
      auto cfg = load_config(config_path);
      auto [ds, anchor_vectors] = load_experiment(cfg);
      AblationOptions opt{cfg.fit, cfg.mode, cfg.alpha0};
      auto table = run_ablation(ds, anchor_vectors, parse_algorithms(algorithms), opt);
      std::cout << format_table(table);
      if (!json_out.empty()) write_text(json_out, to_json(table).dump(2) + "\n");
    } else if (*unbalance) {
      auto cfg = load_config(config_path);
      if (!sweep) {
        auto ds = load_dataset(cfg.texts, cfg.embeddings, cfg.class_labels());
        auto sub = subsample_unbalanced(ds, {target_class, ratio, seed});
        if (out_prefix.empty()) throw Error(ErrorKind::Config, "give --out-prefix or --sweep");
        std::ostringstream os;
        write_dataset_records(os, sub, cfg.class_labels());
        write_text(out_prefix + ".jsonl", os.str());
        save_embeddings(sub.embeddings, out_prefix + ".sptc");
        std::cerr << "kept " << sub.size() << " of " << ds.size() << " rows\n";
      } else {
        auto [ds, anchor_vectors] = load_experiment(cfg);
        AblationOptions opt{cfg.fit, cfg.mode, cfg.alpha0};
        nlohmann::json report = nlohmann::json::array();
        for (double r : ratios) {
          nlohmann::json entry = {{"ratio", r}};
          try {
            auto sub = subsample_unbalanced(ds, {target_class, r, seed});
            auto table = run_ablation(sub, anchor_vectors, parse_algorithms(algorithms), opt);
            entry["rows"] = sub.size();
            entry["table"] = to_json(table);
            std::cerr << "ratio " << r << ":\n" << format_table(table);
          } catch (const Error& e) {
            entry["error"] = e.what();
          }
          report.push_back(entry);
        }
        emit(out_path, report.dump(2) + "\n");
      }
    } else if (*pipeline) {
      auto result = run_pipeline(load_config(config_path));
      warn(result.warnings);
      if (result.metrics)
        std::cerr << "accuracy " << result.metrics->accuracy << ", macro-F1 " << result.metrics->macro_f1 << '\n';
      std::cerr << "outputs in " << result.output_dir.string() << '\n';
    } else if (*project) {
      if (dims != 2 && dims != 3) throw Error(ErrorKind::Config, "--dims must be 2 or 3");
      LabeledDataset ds;
      ds.embeddings = load_embeddings(emb_path);
      std::vector<std::string> class_labels;
      if (!classes_path.empty())
        for (const auto& c : read_classes(classes_path)) class_labels.push_back(c.label);
      if (!dataset_path.empty()) {
        std::ifstream in(dataset_path);
        if (!in) throw Error(ErrorKind::Io, "cannot open " + dataset_path);
        auto records = read_dataset_records(in, dataset_path);
        if (class_labels.empty())
          for (auto& r : records) r.label.reset();
        ds = make_dataset(std::move(records), std::move(ds.embeddings), class_labels);
      } else {
        ds.ids = read_ids("", ds.embeddings.rows());
      }
      auto model = pca_fit_rank(ds.embeddings.to_real(), dims);
      std::vector<int> predicted;
      if (!pred_path.empty()) predicted = labels_for_ids(read_label_jsonl(pred_path), ds.ids, pred_path);
      emit(out_path, projection_to_jsonl(ds.ids, emit_projection(ds, model, dims), ds.gold_labels, predicted));
    } else if (*synth) {
      synthetic::FixtureOptions opt;
      opt.seed = seed;
      std::cout << synthetic::write_fixture(synth_dir, opt).string() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "simptc: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "simptc: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

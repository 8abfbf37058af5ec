#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simptc/error.hpp"
#include "simptc/io.hpp"
#include "simptc/types.hpp"

namespace simptc {

/// A natural-language template with exactly one mask slot. Both the ASCII
/// spelling "<mask>" and the angle-bracket spelling "⟨mask⟩" are accepted.
class Template {
 public:
  static constexpr std::string_view kAsciiMask = "<mask>";
  static constexpr std::string_view kUnicodeMask = "⟨mask⟩";

  explicit Template(std::string text) : text_(std::move(text)) {
    std::size_t hits = count(kAsciiMask) + count(kUnicodeMask);
    if (hits != 1)
      throw Error(ErrorKind::Template, "template '" + text_ + "' must contain exactly one mask placeholder, found " +
                                           std::to_string(hits));
    auto pos = text_.find(kAsciiMask);
    if (pos != std::string::npos) {
      prefix_ = text_.substr(0, pos);
      suffix_ = text_.substr(pos + kAsciiMask.size());
    } else {
      pos = text_.find(kUnicodeMask);
      prefix_ = text_.substr(0, pos);
      suffix_ = text_.substr(pos + kUnicodeMask.size());
    }
  }

  const std::string& text() const { return text_; }

  /// Fills the slot; underscores in the token become spaces.
  std::string fill(std::string_view token) const {
    std::string word(token);
    std::replace(word.begin(), word.end(), '_', ' ');
    return prefix_ + word + suffix_;
  }

 private:
  std::size_t count(std::string_view needle) const {
    std::size_t n = 0;
    for (auto pos = text_.find(needle); pos != std::string::npos; pos = text_.find(needle, pos + needle.size())) ++n;
    return n;
  }

  std::string text_, prefix_, suffix_;
};

/// Template-major, token-minor cartesian product per class. Classes without
/// expansion tokens fall back to their normalized names.
inline std::vector<std::vector<std::string>> render_anchor_sentences(const std::vector<Template>& templates,
                                                                     const std::vector<ClassSpec>& classes) {
  std::vector<std::vector<std::string>> out(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::string> tokens = classes[c].expanded;
    if (tokens.empty())
      for (const auto& n : classes[c].names) tokens.push_back(normalize_token(n));
    if (tokens.empty())
      throw Error(ErrorKind::EmptyAnchor, "class " + std::to_string(classes[c].class_id) + " has nothing to render");
    for (const auto& t : templates)
      for (const auto& tok : tokens) out[c].push_back(t.fill(tok));
  }
  return out;
}

inline Vector average_anchor(const Matrix& sentence_embeddings) {
  if (sentence_embeddings.rows() == 0) throw Error(ErrorKind::EmptyAnchor, "no anchor sentence embeddings");
  return sentence_embeddings.colwise().mean().transpose();
}

/// Each row goes to the anchor with the highest cosine similarity; ties go to
/// the lowest class index. `scores` holds the cosine values.
inline Assignment match_assign(const Matrix& x, const std::vector<Vector>& anchors) {
  if (anchors.empty()) throw Error(ErrorKind::Shape, "no anchor vectors");
  const Eigen::Index k = static_cast<Eigen::Index>(anchors.size());
  Matrix unit(x.cols(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto& a = anchors[static_cast<std::size_t>(j)];
    if (a.size() != x.cols())
      throw Error(ErrorKind::Shape, "anchor " + std::to_string(j) + " has dimension " + std::to_string(a.size()) +
                                        ", embeddings have " + std::to_string(x.cols()));
    const double n = a.norm();
    if (!(n > 0.0)) throw Error(ErrorKind::DegenerateVector, "anchor " + std::to_string(j) + " has zero norm");
    unit.col(j) = a / n;
  }
  Assignment out;
  out.scores.resize(x.rows(), k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double n = x.row(i).norm();
    if (!(n > 0.0)) throw Error(ErrorKind::DegenerateVector, "row " + std::to_string(i) + " has zero norm");
    out.scores.row(i) = (x.row(i) / n) * unit;
  }
  out.labels = argmax_rows(out.scores);
  return out;
}

/// Per-class anchor sentence embeddings listed in a JSON manifest:
/// {"classes": [{"class_id": 0, "path": "class_0.sptc"}, ...]}; relative
/// paths resolve against the manifest's directory.
struct AnchorSet {
  std::vector<Matrix> sentence_embeddings;
  std::vector<Vector> anchor_vectors;

  std::size_t num_classes() const { return anchor_vectors.size(); }
};

inline AnchorSet make_anchor_set(std::vector<Matrix> per_class) {
  AnchorSet set;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    if (per_class[c].rows() == 0)
      throw Error(ErrorKind::EmptyAnchor, "class " + std::to_string(c) + " has no anchor sentences");
    set.anchor_vectors.push_back(average_anchor(per_class[c]));
  }
  set.sentence_embeddings = std::move(per_class);
  return set;
}

inline AnchorSet load_anchor_set(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorKind::Io, "cannot open anchor manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, manifest_path.string() + ": " + e.what());
  }
  if (!j.contains("classes") || !j["classes"].is_array())
    throw Error(ErrorKind::Format, manifest_path.string() + ": expected a 'classes' array");
  const auto& entries = j["classes"];
  std::vector<Matrix> per_class(entries.size());
  std::vector<bool> filled(entries.size(), false);
  for (const auto& e : entries) {
    if (!e.contains("class_id") || !e.contains("path"))
      throw Error(ErrorKind::Format, manifest_path.string() + ": entries need class_id and path");
    const auto id = e["class_id"].get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= entries.size() || filled[static_cast<std::size_t>(id)])
      throw Error(ErrorKind::Format, manifest_path.string() + ": class ids must be 0..K-1 without repeats");
    std::filesystem::path p = e["path"].get<std::string>();
    if (p.is_relative()) p = manifest_path.parent_path() / p;
    per_class[static_cast<std::size_t>(id)] = load_embeddings(p).to_real();
    filled[static_cast<std::size_t>(id)] = true;
  }
  return make_anchor_set(std::move(per_class));
}

inline void save_anchor_set(const AnchorSet& set, const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  j["classes"] = nlohmann::json::array();
  if (manifest_path.has_parent_path()) std::filesystem::create_directories(manifest_path.parent_path());
  const auto stem = manifest_path.stem().string();
  for (std::size_t c = 0; c < set.sentence_embeddings.size(); ++c) {
    const std::string name = stem + ".class_" + std::to_string(c) + ".sptc";
    save_embeddings(EmbeddingMatrix::from_real(set.sentence_embeddings[c]), manifest_path.parent_path() / name);
    j["classes"].push_back({{"class_id", c}, {"path", name}});
  }
  std::ofstream out(manifest_path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + manifest_path.string());
  out << j.dump(2) << '\n';
}

}  // namespace simptc

#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "simptc/error.hpp"
#include "simptc/io.hpp"
#include "simptc/types.hpp"

namespace simptc {

struct ExpansionConfig {
  std::size_t tokens_per_class = 1000;  // M
  bool include_original_names = true;
};

/// Word vector for a class name. Names are normalized first; a multi-word
/// name missing from the vocabulary falls back to the mean of its
/// in-vocabulary parts.
inline Vector name_vector(const WordVectorTable& table, const std::string& name) {
  const std::string key = normalize_token(name);
  if (auto idx = table.find(key)) return table.vectors.row(static_cast<Eigen::Index>(*idx)).cast<double>().transpose();

  Vector sum = Vector::Zero(static_cast<Eigen::Index>(table.dim()));
  std::size_t hits = 0;
  std::size_t start = 0;
  while (start <= key.size()) {
    auto end = key.find('_', start);
    if (end == std::string::npos) end = key.size();
    if (end > start) {
      if (auto idx = table.find(key.substr(start, end - start))) {
        sum += table.vectors.row(static_cast<Eigen::Index>(*idx)).cast<double>().transpose();
        ++hits;
      }
    }
    start = end + 1;
  }
  if (hits == 0) throw Error(ErrorKind::UnknownName, "class name '" + name + "' is not in the word-vector vocabulary");
  return sum / static_cast<double>(hits);
}

/// Indices of the `count` vocabulary rows with the largest inner product with
/// `query`, in non-increasing order; equal scores go to the lower index.
inline std::vector<std::size_t> rank_neighbors(const WordVectorTable& table, const Vector& query, std::size_t count) {
  if (static_cast<std::size_t>(query.size()) != table.dim())
    throw Error(ErrorKind::Shape, "query dimension " + std::to_string(query.size()) + " != table dimension " +
                                      std::to_string(table.dim()));
  const std::size_t n = table.size();
  count = std::min(count, n);
  std::vector<double> score(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    const float* row = table.vectors.data() + i * table.dim();
    for (std::size_t j = 0; j < table.dim(); ++j) s += static_cast<double>(row[j]) * query[static_cast<Eigen::Index>(j)];
    score[i] = s;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) { return score[a] > score[b] || (score[a] == score[b] && a < b); });
  order.resize(count);
  return order;
}

inline std::vector<std::string> rank_neighbors(const WordVectorTable& table, const std::string& query, std::size_t count) {
  auto idx = rank_neighbors(table, name_vector(table, query), count);
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(table.tokens[i]);
  return out;
}

struct ExpansionResult {
  std::vector<ClassSpec> classes;
  std::vector<std::string> warnings;
};

/// Fills `expanded` for each class: floor(M/m) neighbors per name, merged per
/// class, then every token claimed by two or more classes is dropped from all
/// of them (no refill). Original names are re-added to their own class and
/// removed from every other class.
inline ExpansionResult expand_class_names(const WordVectorTable& table, std::vector<ClassSpec> classes,
                                          const ExpansionConfig& config) {
  ExpansionResult result;
  if (config.tokens_per_class == 0 && !config.include_original_names)
    result.warnings.push_back("M=0 without original names: every expanded set is empty");

  std::vector<std::vector<std::string>> candidates(classes.size());
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& names = classes[c].names;
    if (names.empty()) throw Error(ErrorKind::Config, "class " + std::to_string(c) + " has no names");
    const std::size_t per_name = config.tokens_per_class / names.size();
    std::unordered_set<std::string> seen;
    for (const auto& name : names) {
      Vector v = name_vector(table, name);  // resolves or throws even when per_name == 0
      if (per_name == 0) continue;
      for (auto idx : rank_neighbors(table, v, per_name))
        if (seen.insert(table.tokens[idx]).second) candidates[c].push_back(table.tokens[idx]);
    }
  }

  std::unordered_map<std::string, int> owners;
  for (const auto& cand : candidates)
    for (const auto& tok : cand) ++owners[tok];

  std::unordered_map<std::string, std::size_t> original_owner;
  if (config.include_original_names)
    for (std::size_t c = 0; c < classes.size(); ++c)
      for (const auto& name : classes[c].names) original_owner.emplace(normalize_token(name), c);

  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::vector<std::string> kept;
    for (const auto& tok : candidates[c]) {
      if (owners[tok] > 1) continue;
      if (auto it = original_owner.find(tok); it != original_owner.end() && it->second != c) continue;
      kept.push_back(tok);
    }
    if (config.include_original_names) {
      for (const auto& name : classes[c].names) {
        auto tok = normalize_token(name);
        if (std::find(kept.begin(), kept.end(), tok) == kept.end()) kept.push_back(tok);
      }
    }
    if (kept.empty() && config.tokens_per_class > 0)
      result.warnings.push_back("class " + std::to_string(c) + " lost every expansion token to cross-class dedup");
    classes[c].expanded = std::move(kept);
  }
  result.classes = std::move(classes);
  return result;
}

}  // namespace simptc

#pragma once

// On-disk formats: "SPTC" binary embedding matrices, word-vector text tables
// and JSONL dataset records.
//
// SPTC layout (all integers and floats little-endian):
//   bytes 0..3   magic "SPTC"
//   u32          version (1)
//   u64          rows N
//   u64          cols d
//   N*d f32      row-major payload

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "simptc/error.hpp"
#include "simptc/types.hpp"

namespace simptc {

inline constexpr std::array<char, 4> kSptcMagic = {'S', 'P', 'T', 'C'};
inline constexpr std::uint32_t kSptcVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return true;
}

inline std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace detail

/// Writes one SPTC blob to an open stream. Rejects non-finite entries.
inline void write_sptc(std::ostream& out, const EmbeddingMatrix& m) {
  for (Eigen::Index i = 0; i < m.values.rows(); ++i)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j)
      if (!std::isfinite(m.values(i, j)))
        throw Error(ErrorKind::Data, "refusing to write non-finite entry at (" + std::to_string(i) + "," +
                                         std::to_string(j) + ")");
  out.write(kSptcMagic.data(), kSptcMagic.size());
  detail::put_le<std::uint32_t>(out, kSptcVersion);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.values.rows()));
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.values.cols()));
  const float* data = m.values.data();
  for (Eigen::Index i = 0; i < m.values.size(); ++i) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(data[i]));
}

/// Reads one SPTC blob from the current stream position. `source` names the
/// input in error messages.
inline EmbeddingMatrix read_sptc(std::istream& in, const std::string& source = "stream") {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kSptcMagic)
    throw Error(ErrorKind::Format, source + ": missing SPTC magic");
  std::uint32_t version = 0;
  std::uint64_t rows = 0, cols = 0;
  if (!detail::get_le(in, version) || !detail::get_le(in, rows) || !detail::get_le(in, cols))
    throw Error(ErrorKind::Length, source + ": truncated header");
  if (version != kSptcVersion)
    throw Error(ErrorKind::Format, source + ": unsupported SPTC version " + std::to_string(version));
  if (rows == 0 || cols == 0)
    throw Error(ErrorKind::Format, source + ": empty matrix (" + std::to_string(rows) + "x" + std::to_string(cols) + ")");
  if (cols > (std::uint64_t{1} << 32) || rows > (std::uint64_t{1} << 40))
    throw Error(ErrorKind::Format, source + ": implausible shape");

  FloatRowMatrix values(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<unsigned char> row_bytes(cols * 4);
  for (std::uint64_t i = 0; i < rows; ++i) {
    if (!in.read(reinterpret_cast<char*>(row_bytes.data()), static_cast<std::streamsize>(row_bytes.size())))
      throw Error(ErrorKind::Length, source + ": header declares " + std::to_string(rows) + " rows but payload holds " +
                                         std::to_string(i) + " complete rows");
    for (std::uint64_t j = 0; j < cols; ++j) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(row_bytes[j * 4 + b]) << (8 * b);
      float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v))
        throw Error(ErrorKind::Data, source + ": non-finite entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return EmbeddingMatrix(std::move(values));
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  EmbeddingMatrix m = read_sptc(in, path.string());
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorKind::Length, path.string() + ": trailing bytes after declared payload");
  return m;
}

inline void save_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  write_sptc(out, m);
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

/// Lowercases and replaces spaces with underscores ("Policy making" ->
/// "policy_making").
inline std::string normalize_token(std::string_view s) {
  std::string out = detail::trim(s);
  for (char& c : out) {
    if (c == ' ') c = '_';
    else if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

/// Parses a word-vector text table. An optional "count dim" first line is
/// honored; tokens are stored verbatim. Duplicates keep the first occurrence.
inline WordVectorTable read_word_vectors(std::istream& in, const std::string& source = "stream") {
  WordVectorTable table;
  std::vector<float> flat;
  std::size_t dim = 0;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = detail::split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0, hdim = 0;
      if (fields.size() == 2 && detail::parse_number(fields[0], count) && detail::parse_number(fields[1], hdim)) {
        dim = hdim;
        continue;
      }
    }
    const std::size_t nvals = fields.size() - 1;
    if (dim == 0) dim = nvals;
    if (nvals != dim || dim == 0)
      throw Error(ErrorKind::Format, source + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                                         " values, found " + std::to_string(nvals));
    std::string token(fields[0]);
    if (table.index.contains(token)) {
      table.warnings.push_back(source + ":" + std::to_string(line_no) + ": duplicate token '" + token +
                               "' ignored (first occurrence kept)");
      continue;
    }
    for (std::size_t j = 1; j < fields.size(); ++j) {
      float v = 0;
      if (!detail::parse_number(fields[j], v) || !std::isfinite(v))
        throw Error(ErrorKind::Format, source + ":" + std::to_string(line_no) + ": bad value '" +
                                           std::string(fields[j]) + "'");
      flat.push_back(v);
    }
    table.index.emplace(token, table.tokens.size());
    table.tokens.push_back(std::move(token));
  }
  table.vectors = Eigen::Map<FloatRowMatrix>(flat.data(), static_cast<Eigen::Index>(table.tokens.size()),
                                             static_cast<Eigen::Index>(dim));
  return table;
}

inline WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_word_vectors(in, path.string());
}

struct DatasetRecord {
  std::string id;
  std::optional<std::string> label;
  Split split = Split::Train;
};

inline std::vector<DatasetRecord> read_dataset_records(std::istream& in, const std::string& source = "stream") {
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Format, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
      throw Error(ErrorKind::Format, source + ":" + std::to_string(line_no) + ": record needs a string 'id'");
    DatasetRecord r;
    r.id = j["id"].get<std::string>();
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_string())
        throw Error(ErrorKind::Format, source + ":" + std::to_string(line_no) + ": 'label' must be a string");
      r.label = j["label"].get<std::string>();
    }
    if (j.contains("split")) {
      const auto s = j["split"].is_string() ? j["split"].get<std::string>() : std::string();
      if (s == "train") r.split = Split::Train;
      else if (s == "test") r.split = Split::Test;
      else throw Error(ErrorKind::Format, source + ":" + std::to_string(line_no) + ": split must be train|test");
    }
    records.push_back(std::move(r));
  }
  return records;
}

/// Builds an aligned dataset. `class_labels[k]` is the label string of class k.
inline LabeledDataset make_dataset(std::vector<DatasetRecord> records, EmbeddingMatrix embeddings,
                                   const std::vector<std::string>& class_labels) {
  if (records.size() != embeddings.rows())
    throw Error(ErrorKind::Alignment, std::to_string(records.size()) + " records but " +
                                          std::to_string(embeddings.rows()) + " embedding rows");
  LabeledDataset ds;
  ds.embeddings = std::move(embeddings);
  ds.ids.reserve(records.size());
  for (auto& r : records) {
    ds.ids.push_back(std::move(r.id));
    ds.splits.push_back(r.split);
    if (r.label) {
      auto it = std::find(class_labels.begin(), class_labels.end(), *r.label);
      if (it == class_labels.end())
        throw Error(ErrorKind::Label, "unknown label '" + *r.label + "' for record " + ds.ids.back());
      ds.gold_labels.emplace_back(static_cast<int>(it - class_labels.begin()));
    } else {
      ds.gold_labels.emplace_back(std::nullopt);
    }
  }
  return ds;
}

inline LabeledDataset load_dataset(const std::filesystem::path& text_path, const std::filesystem::path& embedding_path,
                                   const std::vector<std::string>& class_labels) {
  std::ifstream in(text_path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + text_path.string());
  auto records = read_dataset_records(in, text_path.string());
  return make_dataset(std::move(records), load_embeddings(embedding_path), class_labels);
}

inline void write_dataset_records(std::ostream& out, const LabeledDataset& ds, const std::vector<std::string>& class_labels) {
  for (std::size_t i = 0; i < ds.size(); ++i) {
    nlohmann::json j;
    j["id"] = ds.ids[i];
    if (i < ds.gold_labels.size() && ds.gold_labels[i]) j["label"] = class_labels.at(static_cast<std::size_t>(*ds.gold_labels[i]));
    j["split"] = ds.splits[i] == Split::Test ? "test" : "train";
    out << j.dump() << '\n';
  }
}

}  // namespace simptc

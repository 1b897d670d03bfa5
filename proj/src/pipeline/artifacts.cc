// pipeline/artifacts.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phonegan/pipeline/artifacts.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace phonegan {

namespace {

using nlohmann::json;

std::string Where(const std::string &file, int line) {
  return line > 0 ? file + ":" + std::to_string(line) : file;
}

const json &Member(const json &obj, const char *name, const std::string &file,
                   int line) {
  if (!obj.is_object()) throw FormatError(file, line, "", "expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) {
    throw FormatError(file, line, name, "missing field");
  }
  return *it;
}

Tensor MatrixFromJson(const json &rows, const std::string &file, int line,
                      const char *field, std::size_t expected_cols = 0) {
  if (!rows.is_array()) throw FormatError(file, line, field, "expected array");
  std::size_t cols = expected_cols;
  if (!rows.empty()) {
    if (!rows[0].is_array()) {
      throw FormatError(file, line, field, "expected array of rows");
    }
    if (cols == 0) cols = rows[0].size();
  }
  Tensor out({rows.size(), cols});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json &row = rows[r];
    if (!row.is_array() || row.size() != cols) {
      throw FormatError(file, line, field,
                        "row " + std::to_string(r) + " has " +
                            std::to_string(row.is_array() ? row.size() : 0) +
                            " values, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw FormatError(file, line, field, "non-numeric entry");
      }
      out.at(r, c) = row[c].get<double>();
    }
  }
  if (!out.AllFinite()) throw FormatError(file, line, field, "non-finite value");
  return out;
}

json MatrixToJson(const Tensor &m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.dim(0); ++r) {
    json row = json::array();
    for (double v : m.row(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<int> IntsFromJson(const json &arr, const std::string &file,
                              int line, const char *field) {
  if (!arr.is_array()) throw FormatError(file, line, field, "expected array");
  std::vector<int> out;
  out.reserve(arr.size());
  for (const json &v : arr) {
    if (!v.is_number_integer()) {
      throw FormatError(file, line, field, "expected integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

json ParseJson(const std::string &text, const std::string &file, int line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw FormatError(file, line, "", std::string("invalid JSON: ") + e.what());
  }
}

// Calls `fn(object, line)` for every non-blank line.
void ForEachJsonLine(const std::filesystem::path &path,
                     const std::function<void(const json &, int)> &fn) {
  const std::string file = path.string();
  std::istringstream is(ReadFileText(path));
  std::string text;
  int line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(ParseJson(text, file, line), line);
  }
}

std::string IdFromJson(const json &obj, const std::string &file, int line) {
  const json &id = Member(obj, "id", file, line);
  if (!id.is_string()) throw FormatError(file, line, "id", "expected string");
  return id.get<std::string>();
}

std::size_t SizeFromJson(const json &obj, const char *name,
                         const std::string &file) {
  const json &v = Member(obj, name, file, 0);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw FormatError(file, 0, name, "expected a positive integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

FormatError::FormatError(const std::string &file, int line,
                         const std::string &field, const std::string &message)
    : std::runtime_error(Where(file, line) + ": " +
                         (field.empty() ? "" : "field '" + field + "': ") +
                         message),
      file_(file),
      line_(line),
      field_(field),
      message_(message) {}

std::string ReadFileText(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileText(const std::filesystem::path &path, const std::string &text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path.string(), 0, "", "cannot write file");
    out << text;
    if (!out) throw FormatError(path.string(), 0, "", "write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string CodebookToJson(const Codebook &codebook) {
  json j;
  j["k"] = codebook.k();
  j["dim"] = codebook.dim();
  j["centroids"] = MatrixToJson(codebook.centroids);
  return j.dump() + "\n";
}

Codebook ReadCodebook(const std::filesystem::path &path) {
  const std::string file = path.string();
  const json j = ParseJson(ReadFileText(path), file, 0);
  const std::size_t k = SizeFromJson(j, "k", file);
  const std::size_t dim = SizeFromJson(j, "dim", file);
  Codebook cb{MatrixFromJson(Member(j, "centroids", file, 0), file, 0,
                             "centroids", dim)};
  if (cb.centroids.dim(0) != k) {
    throw FormatError(file, 0, "centroids",
                      std::to_string(cb.centroids.dim(0)) + " rows but k=" +
                          std::to_string(k));
  }
  return cb;
}

std::string ClustersToJsonl(const std::vector<ClusterIndexSequence> &seqs) {
  std::string out;
  for (const auto &s : seqs) {
    json j;
    j["id"] = s.id;
    j["indices"] = s.indices;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<ClusterIndexSequence> ReadClusters(
    const std::filesystem::path &path) {
  const std::string file = path.string();
  std::vector<ClusterIndexSequence> out;
  ForEachJsonLine(path, [&](const json &j, int line) {
    ClusterIndexSequence s{IdFromJson(j, file, line),
                           IntsFromJson(Member(j, "indices", file, line), file,
                                        line, "indices")};
    if (s.indices.empty()) {
      throw FormatError(file, line, "indices", "empty sequence");
    }
    for (int c : s.indices) {
      if (c < 1) throw FormatError(file, line, "indices", "ids must be >= 1");
    }
    out.push_back(std::move(s));
  });
  if (out.empty()) throw FormatError(file, 0, "", "no cluster sequences");
  return out;
}

std::string MappingToJson(const Mapping &mapping) {
  json j;
  j["k"] = mapping.table.num_clusters();
  j["l"] = mapping.table.num_phonemes();
  j["e"] = MatrixToJson(mapping.table.logits());
  j["phoneme_names"] = mapping.phoneme_names;
  return j.dump() + "\n";
}

Mapping ReadMapping(const std::filesystem::path &path) {
  const std::string file = path.string();
  const json j = ParseJson(ReadFileText(path), file, 0);
  const std::size_t k = SizeFromJson(j, "k", file);
  const std::size_t l = SizeFromJson(j, "l", file);
  Tensor e = MatrixFromJson(Member(j, "e", file, 0), file, 0, "e", l);
  if (e.dim(0) != k) {
    throw FormatError(file, 0, "e",
                      std::to_string(e.dim(0)) + " rows but k=" +
                          std::to_string(k));
  }
  Mapping m{LookupTable(std::move(e)), {}};
  const json &names = Member(j, "phoneme_names", file, 0);
  if (!names.is_array() || names.size() != l) {
    throw FormatError(file, 0, "phoneme_names", "expected l names");
  }
  for (const json &n : names) {
    if (!n.is_string()) {
      throw FormatError(file, 0, "phoneme_names", "expected strings");
    }
    m.phoneme_names.push_back(n.get<std::string>());
  }
  return m;
}

std::string EmbeddingsToJsonl(const std::vector<UtteranceEmbeddings> &utts) {
  std::string out;
  for (const auto &u : utts) {
    json j;
    j["id"] = u.id;
    j["embeddings"] = MatrixToJson(u.embeddings);
    if (!u.labels.empty()) j["labels"] = u.labels;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<UtteranceEmbeddings> ReadEmbeddings(
    const std::filesystem::path &path) {
  const std::string file = path.string();
  std::vector<UtteranceEmbeddings> out;
  std::size_t dim = 0;
  ForEachJsonLine(path, [&](const json &j, int line) {
    UtteranceEmbeddings u;
    u.id = IdFromJson(j, file, line);
    u.embeddings = MatrixFromJson(Member(j, "embeddings", file, line), file,
                                  line, "embeddings", dim);
    if (u.embeddings.dim(0) == 0 || u.embeddings.dim(1) == 0) {
      throw FormatError(file, line, "embeddings", "empty matrix");
    }
    dim = u.embeddings.dim(1);
    if (j.contains("labels")) {
      u.labels = IntsFromJson(j["labels"], file, line, "labels");
      if (u.labels.size() != u.embeddings.dim(0)) {
        throw FormatError(file, line, "labels",
                          "one label per segment required");
      }
    }
    out.push_back(std::move(u));
  });
  if (out.empty()) throw FormatError(file, 0, "", "no utterances");
  return out;
}

std::string DecodedToJsonl(const std::vector<DecodedUtterance> &utts) {
  std::string out;
  for (const auto &u : utts) {
    json j;
    j["id"] = u.id;
    j["phonemes"] = u.phonemes;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<DecodedUtterance> ReadDecoded(const std::filesystem::path &path) {
  const std::string file = path.string();
  std::vector<DecodedUtterance> out;
  ForEachJsonLine(path, [&](const json &j, int line) {
    out.push_back({IdFromJson(j, file, line),
                   IntsFromJson(Member(j, "phonemes", file, line), file, line,
                                "phonemes")});
  });
  if (out.empty()) throw FormatError(file, 0, "", "no utterances");
  return out;
}

}  // namespace phonegan

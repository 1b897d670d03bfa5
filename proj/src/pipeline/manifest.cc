// pipeline/manifest.cc
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

#include "phonegan/pipeline/manifest.h"

#include <openssl/evp.h>

#include <json.hpp>

#include "phonegan/pipeline/artifacts.h"

namespace phonegan {

namespace {

using nlohmann::json;

json EntryToJson(const ManifestEntry &e) {
  return json{{"path", e.path}, {"sha256", e.sha256}, {"bytes", e.bytes}};
}

std::vector<ManifestEntry> EntriesFromJson(const json &arr,
                                           const std::string &file,
                                           const char *field) {
  if (!arr.is_array()) throw FormatError(file, 0, field, "expected array");
  std::vector<ManifestEntry> out;
  for (const json &e : arr) {
    if (!e.is_object() || !e.contains("path") || !e.contains("sha256") ||
        !e["path"].is_string() || !e["sha256"].is_string()) {
      throw FormatError(file, 0, field, "entries need path and sha256");
    }
    out.push_back({e["path"].get<std::string>(), e["sha256"].get<std::string>(),
                   e.value("bytes", std::uint64_t{0})});
  }
  return out;
}

}  // namespace

std::string Sha256Hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static const char *hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

std::string Sha256File(const std::filesystem::path &path) {
  return Sha256Hex(ReadFileText(path));
}

ManifestEntry HashEntry(const std::filesystem::path &path,
                        const std::string &recorded_path) {
  const std::string bytes = ReadFileText(path);
  return {recorded_path, Sha256Hex(bytes), bytes.size()};
}

std::string ManifestToJson(const Manifest &m) {
  json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["config_sha256"] = m.config_sha256;
  j["inputs"] = json::array();
  for (const auto &e : m.inputs) j["inputs"].push_back(EntryToJson(e));
  j["outputs"] = json::array();
  for (const auto &e : m.outputs) j["outputs"].push_back(EntryToJson(e));
  return j.dump(2) + "\n";
}

Manifest ReadManifest(const std::filesystem::path &path) {
  const std::string file = path.string();
  json j;
  try {
    j = json::parse(ReadFileText(path));
  } catch (const json::parse_error &e) {
    throw FormatError(file, 0, "", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError(file, 0, "", "expected an object");
  Manifest m;
  m.command = j.value("command", std::string());
  m.seed = j.value("seed", std::uint64_t{0});
  m.config_sha256 = j.value("config_sha256", std::string());
  if (j.contains("inputs")) m.inputs = EntriesFromJson(j["inputs"], file, "inputs");
  if (j.contains("outputs")) {
    m.outputs = EntriesFromJson(j["outputs"], file, "outputs");
  }
  return m;
}

ManifestEntry CheckInput(const std::filesystem::path &path) {
  ManifestEntry entry = HashEntry(path, path.string());
  const std::filesystem::path manifest_path =
      path.parent_path() / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) return entry;
  const Manifest m = ReadManifest(manifest_path);
  const std::string name = path.filename().string();
  for (const auto &out : m.outputs) {
    if (out.path == name && out.sha256 != entry.sha256) {
      throw StaleInputError(path.string(), manifest_path.string());
    }
  }
  return entry;
}

}  // namespace phonegan

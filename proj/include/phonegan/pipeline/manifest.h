// phonegan/pipeline/manifest.h
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

// Content hashes of a stage's inputs and outputs, written as
// manifest.json next to the outputs.

#ifndef PHONEGAN_PIPELINE_MANIFEST_H_
#define PHONEGAN_PIPELINE_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace phonegan {

std::string Sha256Hex(const std::string &bytes);
std::string Sha256File(const std::filesystem::path &path);

struct ManifestEntry {
  std::string path;  // inputs: as given; outputs: relative to the directory
  std::string sha256;
  std::uint64_t bytes = 0;
};

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_sha256;  // hash of config.resolved
  std::vector<ManifestEntry> inputs;
  std::vector<ManifestEntry> outputs;
};

ManifestEntry HashEntry(const std::filesystem::path &path,
                        const std::string &recorded_path);

std::string ManifestToJson(const Manifest &m);
Manifest ReadManifest(const std::filesystem::path &path);

// An input whose bytes differ from what its producing stage recorded.
class StaleInputError : public std::runtime_error {
 public:
  StaleInputError(const std::string &file, const std::string &manifest)
      : std::runtime_error(file + ": content hash differs from " + manifest),
        file_(file),
        manifest_(manifest) {}
  const std::string &file() const { return file_; }
  const std::string &manifest() const { return manifest_; }

 private:
  std::string file_;
  std::string manifest_;
};

// When the file's directory holds a manifest.json listing it as an
// output, the recorded hash must match; throws StaleInputError otherwise.
// Returns the entry to record as an input of the next stage.
ManifestEntry CheckInput(const std::filesystem::path &path);

}  // namespace phonegan

#endif  // PHONEGAN_PIPELINE_MANIFEST_H_

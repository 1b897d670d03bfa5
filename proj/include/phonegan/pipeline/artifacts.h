// phonegan/pipeline/artifacts.h
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

// Readers and writers for the files passed between pipeline stages.

#ifndef PHONEGAN_PIPELINE_ARTIFACTS_H_
#define PHONEGAN_PIPELINE_ARTIFACTS_H_

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonegan/cluster/kmeans.h"
#include "phonegan/ganmap/generator.h"
#include "phonegan/numcore/tensor.h"

namespace phonegan {

// A file that cannot be read or does not parse. `field` names the JSON
// member at fault when known; `line` is 1-based, 0 for whole-file errors.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string &file, int line, const std::string &field,
              const std::string &message);
  const std::string &file() const { return file_; }
  int line() const { return line_; }
  const std::string &field() const { return field_; }
  const std::string &message() const { return message_; }

 private:
  std::string file_;
  int line_;
  std::string field_;
  std::string message_;
};

// Per-utterance segment embeddings (M x d) with optional labels.
struct UtteranceEmbeddings {
  std::string id;
  Tensor embeddings;
  std::vector<int> labels;
};

struct Mapping {
  LookupTable table;
  std::vector<std::string> phoneme_names;
};

struct DecodedUtterance {
  std::string id;
  std::vector<int> phonemes;
};

std::string ReadFileText(const std::filesystem::path &path);
// Writes through a temporary file and renames it into place.
void WriteFileText(const std::filesystem::path &path, const std::string &text);

// {"k", "dim", "centroids": [[...], ...]}
std::string CodebookToJson(const Codebook &codebook);
Codebook ReadCodebook(const std::filesystem::path &path);

// One {"id", "indices": [...]} object per line.
std::string ClustersToJsonl(const std::vector<ClusterIndexSequence> &seqs);
std::vector<ClusterIndexSequence> ReadClusters(
    const std::filesystem::path &path);

// {"k", "l", "e": K x L, "phoneme_names": [...]}
std::string MappingToJson(const Mapping &mapping);
Mapping ReadMapping(const std::filesystem::path &path);

// One {"id", "embeddings": [[...], ...], "labels": [...]} per line.
std::string EmbeddingsToJsonl(const std::vector<UtteranceEmbeddings> &utts);
std::vector<UtteranceEmbeddings> ReadEmbeddings(
    const std::filesystem::path &path);

// One {"id", "phonemes": [...]} per line.
std::string DecodedToJsonl(const std::vector<DecodedUtterance> &utts);
std::vector<DecodedUtterance> ReadDecoded(const std::filesystem::path &path);

// Shortest decimal text that reads back to the same double.
std::string FormatDouble(double v);

}  // namespace phonegan

#endif  // PHONEGAN_PIPELINE_ARTIFACTS_H_

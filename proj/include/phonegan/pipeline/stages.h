// phonegan/pipeline/stages.h
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

// One function per pipeline stage. Each reads its inputs, writes its
// outputs plus config.resolved and manifest.json into `out`, and returns
// the output file names.

#ifndef PHONEGAN_PIPELINE_STAGES_H_
#define PHONEGAN_PIPELINE_STAGES_H_

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "phonegan/pipeline/config.h"

namespace phonegan {

namespace fs = std::filesystem;

// Progress lines for standard error.
using StageLog = std::function<void(const std::string &)>;

struct StageContext {
  PipelineConfig config;  // stage seeds already derived
  fs::path out;
  int jobs = 1;
  StageLog log;
};

// world.json, train.features.jsonl, test.features.jsonl, text.txt,
// lexicon.tsv, phonemes.txt.
std::vector<std::string> RunSynth(const StageContext &ctx);

// embeddings.jsonl (and embeddings_test.jsonl), plus sae.json and
// sae_log.csv for the autoencoder.
std::vector<std::string> RunEmbed(const StageContext &ctx,
                                  const fs::path &features,
                                  const fs::path &features_test);

// codebook.json, clusters.jsonl (and clusters_test.jsonl),
// cluster_report.json.
std::vector<std::string> RunCluster(const StageContext &ctx,
                                    const fs::path &embeddings,
                                    const fs::path &embeddings_test);

struct TextInputs {
  fs::path text;
  fs::path lexicon;
  fs::path phonemes;  // optional inventory, one name per line
};

// mapping.json, train_log.csv. `probe_labels`, when given, names a file
// with per-utterance labels whose accuracy is logged (never trained on).
std::vector<std::string> RunTrainGan(const StageContext &ctx,
                                     const fs::path &clusters,
                                     const TextInputs &text,
                                     const fs::path &probe_labels);

// decoded.jsonl.
std::vector<std::string> RunDecode(const StageContext &ctx,
                                   const fs::path &mapping,
                                   const fs::path &clusters);

// report.json: accuracy, confusion, baselines and, with clusters, purity.
// `train_reference` supplies the most-frequent baseline's label counts;
// the reference itself is used when it is empty. The phoneme count comes
// from `phonemes` when given, else from the largest id seen.
std::vector<std::string> RunEval(const StageContext &ctx,
                                 const fs::path &decoded,
                                 const fs::path &reference,
                                 const fs::path &clusters,
                                 const fs::path &train_reference,
                                 const fs::path &phonemes);

// sweep.csv over config.eval.sweep_ks.
std::vector<std::string> RunSweep(const StageContext &ctx,
                                  const fs::path &embeddings,
                                  const fs::path &embeddings_test,
                                  const TextInputs &text);

// decoded.jsonl and report.json from a majority vote of the mapping.json
// files in `runs`.
std::vector<std::string> RunEnsemble(const StageContext &ctx,
                                     const std::vector<fs::path> &runs,
                                     const fs::path &clusters,
                                     const fs::path &reference);

// Per-utterance "labels" arrays from any JSON-lines file that has "id" and
// "labels" members (feature or embedding files).
struct ReferenceLabels {
  std::vector<std::string> ids;
  std::vector<std::vector<int>> labels;
};
ReferenceLabels ReadReferenceLabels(const fs::path &path);

}  // namespace phonegan

#endif  // PHONEGAN_PIPELINE_STAGES_H_

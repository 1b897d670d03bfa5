// phonegan/pipeline/config.h
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

// Flat `section.key=value` configuration for every pipeline stage.

#ifndef PHONEGAN_PIPELINE_CONFIG_H_
#define PHONEGAN_PIPELINE_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "phonegan/audio2vec/sae.h"
#include "phonegan/cluster/kmeans.h"
#include "phonegan/eval/supervised.h"
#include "phonegan/ganmap/trainer.h"
#include "phonegan/synth/world.h"

namespace phonegan {

enum class EncoderKind { kSae, kMean };

struct SynthSection {
  WorldConfig world;
  CorpusConfig corpus;
  std::size_t test_utterances = 100;
  bool unrelated_text = false;  // write the independent draw as text
};

struct Audio2VecSection {
  EncoderKind encoder = EncoderKind::kSae;
  bool cmvn = true;
  SaeConfig sae;
};

struct EvalSection {
  std::vector<std::size_t> sweep_ks{50, 100, 200, 300, 500, 800, 1000};
  std::size_t ensemble_size = 6;
  SupervisedConfig supervised;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  SynthSection synth;
  Audio2VecSection audio2vec;
  KMeansConfig cluster;
  GanConfig ganmap;
  EvalSection eval;
};

// A bad key or value. `line` is 0 when the setting did not come from a
// file.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string &what, std::string key, std::string source,
              int line)
      : std::invalid_argument(what),
        key_(std::move(key)),
        source_(std::move(source)),
        line_(line) {}
  const std::string &key() const { return key_; }
  const std::string &source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string key_;
  std::string source_;
  int line_;
};

// Sorted list of every recognized key.
std::vector<std::string> ConfigKeys();

void SetConfigValue(PipelineConfig &config, const std::string &key,
                    const std::string &value);
std::string GetConfigValue(const PipelineConfig &config,
                           const std::string &key);

// Lines of `key=value`; `#` starts a comment, blank lines are ignored.
void ApplyConfigText(PipelineConfig &config, const std::string &text,
                     const std::string &source);
// `key=value` strings, as given on the command line.
void ApplyOverrides(PipelineConfig &config,
                    const std::vector<std::string> &overrides);

// Every key with its effective value, one per line, sorted by key.
std::string ResolvedConfigText(const PipelineConfig &config);

// Seed for a named stage: Rng(root).Derive(stage).seed().
std::uint64_t StageSeed(std::uint64_t root, const std::string &stage);

// Copies the root seed into each stage's own seed field.
void DeriveStageSeeds(PipelineConfig &config);

}  // namespace phonegan

#endif  // PHONEGAN_PIPELINE_CONFIG_H_

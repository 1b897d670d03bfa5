// phonegan/synth/world.h
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

// Synthetic stand-in for a speech corpus plus text: phoneme strings come
// from a bigram chain, each phoneme occurrence emits a noisy vector near
// one of its prototypes. Ground truth is known, so purity and accuracy
// ceilings can be computed exactly.

#ifndef PHONEGAN_SYNTH_WORLD_H_
#define PHONEGAN_SYNTH_WORLD_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phonegan/numcore/rng.h"
#include "phonegan/numcore/tensor.h"

namespace phonegan {

struct WorldConfig {
  std::size_t num_phonemes = 10;
  std::size_t modes_per_phoneme = 1;
  std::size_t dim = 8;
  double sigma = 0.0;
  double min_proto_gap = 1.0;
  // Prototypes are drawn uniformly from [-proto_range, proto_range]^dim.
  double proto_range = 2.0;
  // Bigram rows are Dirichlet(concentration) mixed with bigram_floor of
  // the uniform distribution, so every transition has positive mass.
  double bigram_concentration = 0.1;
  double bigram_floor = 0.02;
  // When positive, the bigram is instead a Dirichlet-weighted mixture of
  // this many random permutation matrices (plus the floor). Such a matrix
  // is doubly stochastic, so the stationary phoneme distribution is
  // uniform and only sequential structure distinguishes phonemes.
  std::size_t bigram_permutations = 0;
  std::uint64_t seed = 0;
  int max_rejections = 100000;
};

struct World {
  WorldConfig config;
  Tensor prototypes;  // (L * modes) x dim; row p * modes + m
  Tensor bigram;      // L x L, rows sum to 1
  std::vector<double> initial;  // start distribution over phonemes

  std::size_t num_phonemes() const { return config.num_phonemes; }
  std::size_t modes() const { return config.modes_per_phoneme; }
  std::size_t dim() const { return config.dim; }
  std::vector<std::string> PhonemeNames() const;
};

World GenWorld(const WorldConfig &config);

struct FrameConfig {
  bool enabled = false;
  std::size_t min_frames = 3;
  std::size_t max_frames = 6;
  // Silence frames (noise around zero) before the first and after the last
  // segment; boundaries exclude them.
  std::size_t silence_frames = 0;
};

struct CorpusConfig {
  std::size_t num_utterances = 500;
  std::size_t min_length = 20;
  std::size_t max_length = 40;
  std::size_t num_unrelated_sentences = 0;  // 0 means same as num_utterances
  FrameConfig frames;
  std::uint64_t seed = 1;
};

struct SynthUtterance {
  std::string id;
  std::vector<int> labels;  // phoneme ids, one per segment
  std::vector<int> modes;   // prototype mode per segment
  Tensor embeddings;        // M x dim
  Tensor frames;            // T x dim, only when frames are enabled
  std::vector<int> boundaries;
};

struct SynthCorpus {
  std::vector<SynthUtterance> utterances;
  // The generating phoneme strings (transcriptions of the audio).
  std::vector<std::vector<int>> matched_text;
  // Independent draws from the same bigram chain.
  std::vector<std::vector<int>> unrelated_text;
};

std::vector<int> SamplePhonemeString(const World &world, std::size_t length,
                                     Rng &rng);

SynthCorpus GenCorpus(const World &world, const CorpusConfig &config);

// Per-cluster modal label (lowest label wins ties) and the accuracy of
// mapping every point to its cluster's modal label.
struct OracleMap {
  std::vector<std::pair<int, int>> cluster_to_label;  // sorted by cluster
  double accuracy = 0.0;
};
OracleMap OracleBestMap(std::span<const int> indices,
                        std::span<const int> labels);

// All embeddings of a corpus stacked (N x dim), with parallel label and
// per-utterance offset vectors.
struct StackedCorpus {
  Tensor embeddings;
  std::vector<int> labels;
  std::vector<std::size_t> offsets;  // size = utterances + 1
};
StackedCorpus Stack(const SynthCorpus &corpus);

}  // namespace phonegan

#endif  // PHONEGAN_SYNTH_WORLD_H_

// phonegan/ganmap/generator.h
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

#ifndef PHONEGAN_GANMAP_GENERATOR_H_
#define PHONEGAN_GANMAP_GENERATOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phonegan/numcore/adam.h"
#include "phonegan/numcore/ops.h"
#include "phonegan/numcore/rng.h"
#include "phonegan/numcore/tensor.h"

namespace phonegan {

enum class GeneratorMode { kSoftmax, kGumbel };

const char *ModeName(GeneratorMode mode);
GeneratorMode ParseMode(const std::string &name);

// N x L rows of phoneme vectors. A row is part of the sequence only where
// mask[t] != 0; masked rows are ignored by the discriminator.
struct PhonemeVectorSequence {
  Tensor vectors;
  std::vector<std::uint8_t> mask;

  std::size_t length() const { return mask.size(); }
  std::size_t num_phonemes() const { return vectors.dim(1); }
  std::size_t valid_count() const;
};

// One-hot rows for phoneme ids, padded with masked zero rows up to
// `padded_length` (0 keeps the natural length).
PhonemeVectorSequence OneHotSequence(std::span<const int> phonemes,
                                     std::size_t num_phonemes,
                                     std::size_t padded_length = 0);

// The generator: a K x L table whose row k holds the phoneme logits of
// cluster k + 1.
class LookupTable {
 public:
  LookupTable() = default;
  LookupTable(std::size_t num_clusters, std::size_t num_phonemes);
  explicit LookupTable(Tensor logits);

  // i.i.d. normal(0, stddev) entries.
  static LookupTable Random(std::size_t num_clusters, std::size_t num_phonemes,
                            double stddev, Rng &rng);

  std::size_t num_clusters() const { return table_.value.dim(0); }
  std::size_t num_phonemes() const { return table_.value.dim(1); }
  const Tensor &logits() const { return table_.value; }
  Tensor &logits() { return table_.value; }
  Parameter &parameter() { return table_; }
  std::span<const double> Row(int cluster) const;  // cluster is 1-based

  void CheckIndices(std::span<const int> indices) const;

 private:
  Parameter table_;
};

// Forward record needed to route gradients back into the table.
struct GeneratedSequence {
  PhonemeVectorSequence output;
  std::vector<int> clusters;  // 1-based, one per row, 0 for padding rows
  GeneratorMode mode = GeneratorMode::kSoftmax;
  double inv_temp = 1.0;
  // Distribution whose Jacobian the backward pass uses: softmax(e_k), or
  // the relaxed gumbel sample in gumbel mode.
  std::vector<std::vector<double>> soft;
};

// Row i is softmax(e_{c_i}) or, in gumbel mode, a straight-through sample
// whose forward value is one-hot. Rows past indices.size() up to
// `padded_length` are masked zeros.
GeneratedSequence Generate(std::span<const int> indices,
                           const LookupTable &table, GeneratorMode mode,
                           double inv_temp, Rng &rng,
                           std::size_t padded_length = 0);

// Accumulates dL/dE into table.parameter().grad given dL/d(output rows).
void GenerateBackward(const GeneratedSequence &generated,
                      const Tensor &doutput, LookupTable &table);

// argmax_j e_{c_i, j} per position; lowest phoneme id wins ties.
std::vector<int> Decode(std::span<const int> indices,
                        const LookupTable &table);

// Decoded phoneme for every cluster, index 0 holds cluster 1.
std::vector<int> ClusterToPhoneme(const LookupTable &table);

}  // namespace phonegan

#endif  // PHONEGAN_GANMAP_GENERATOR_H_

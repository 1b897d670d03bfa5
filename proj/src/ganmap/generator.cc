// ganmap/generator.cc
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

#include "phonegan/ganmap/generator.h"

#include <algorithm>
#include <stdexcept>

#include "phonegan/numcore/error.h"

namespace phonegan {

const char *ModeName(GeneratorMode mode) {
  return mode == GeneratorMode::kGumbel ? "gumbel" : "softmax";
}

GeneratorMode ParseMode(const std::string &name) {
  if (name == "softmax") return GeneratorMode::kSoftmax;
  if (name == "gumbel") return GeneratorMode::kGumbel;
  throw std::invalid_argument("unknown generator mode '" + name +
                              "' (expected softmax or gumbel)");
}

std::size_t PhonemeVectorSequence::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

PhonemeVectorSequence OneHotSequence(std::span<const int> phonemes,
                                     std::size_t num_phonemes,
                                     std::size_t padded_length) {
  const std::size_t n = std::max(phonemes.size(), padded_length);
  PhonemeVectorSequence seq{Tensor({n, num_phonemes}),
                            std::vector<std::uint8_t>(n, 0)};
  for (std::size_t t = 0; t < phonemes.size(); ++t) {
    const int p = phonemes[t];
    if (p < 0 || static_cast<std::size_t>(p) >= num_phonemes) {
      throw std::invalid_argument("phoneme id " + std::to_string(p) +
                                  " outside [0, " +
                                  std::to_string(num_phonemes) + ")");
    }
    seq.vectors.at(t, static_cast<std::size_t>(p)) = 1.0;
    seq.mask[t] = 1;
  }
  return seq;
}

LookupTable::LookupTable(std::size_t num_clusters, std::size_t num_phonemes)
    : table_(Tensor({num_clusters, num_phonemes})) {}

LookupTable::LookupTable(Tensor logits) : table_(std::move(logits)) {
  if (table_.value.rank() != 2) {
    throw ShapeError("lookup table must be K x L, got " +
                     ShapeToString(table_.value.shape()));
  }
  if (!table_.value.AllFinite()) {
    throw NonFiniteError("lookup table has non-finite entries");
  }
}

LookupTable LookupTable::Random(std::size_t num_clusters,
                                std::size_t num_phonemes, double stddev,
                                Rng &rng) {
  LookupTable t(num_clusters, num_phonemes);
  for (double &v : t.logits().data()) v = rng.Normal(0.0, stddev);
  return t;
}

std::span<const double> LookupTable::Row(int cluster) const {
  return table_.value.row(static_cast<std::size_t>(cluster - 1));
}

void LookupTable::CheckIndices(std::span<const int> indices) const {
  const int k = static_cast<int>(num_clusters());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 1 || indices[i] > k) {
      throw std::out_of_range("cluster index " + std::to_string(indices[i]) +
                              " at position " + std::to_string(i) +
                              " outside [1, " + std::to_string(k) + "]");
    }
  }
}

GeneratedSequence Generate(std::span<const int> indices,
                           const LookupTable &table, GeneratorMode mode,
                           double inv_temp, Rng &rng,
                           std::size_t padded_length) {
  table.CheckIndices(indices);
  if (mode == GeneratorMode::kGumbel && !(inv_temp > 0.0)) {
    throw std::invalid_argument("gumbel mode needs inv_temp > 0");
  }
  const std::size_t L = table.num_phonemes();
  const std::size_t n = std::max(indices.size(), padded_length);
  GeneratedSequence g;
  g.output = PhonemeVectorSequence{Tensor({n, L}),
                                   std::vector<std::uint8_t>(n, 0)};
  g.clusters.assign(n, 0);
  g.mode = mode;
  g.inv_temp = inv_temp;
  g.soft.resize(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) {
    auto row = g.output.vectors.row(t);
    if (mode == GeneratorMode::kSoftmax) {
      g.soft[t] = Softmax(table.Row(indices[t]));
      std::copy(g.soft[t].begin(), g.soft[t].end(), row.begin());
    } else {
      GumbelSample s = GumbelSoftmax(table.Row(indices[t]), inv_temp, rng);
      std::copy(s.hard.begin(), s.hard.end(), row.begin());
      g.soft[t] = std::move(s.soft);
    }
    g.output.mask[t] = 1;
    g.clusters[t] = indices[t];
  }
  return g;
}

void GenerateBackward(const GeneratedSequence &generated,
                      const Tensor &doutput, LookupTable &table) {
  CheckShape(doutput, generated.output.vectors.shape(),
             "generator output gradient");
  Tensor &grad = table.parameter().grad;
  const double scale =
      generated.mode == GeneratorMode::kGumbel ? generated.inv_temp : 1.0;
  for (std::size_t t = 0; t < generated.soft.size(); ++t) {
    if (!generated.output.mask[t]) continue;
    const std::vector<double> d =
        SoftmaxBackward(generated.soft[t], doutput.row(t));
    auto dst = grad.row(static_cast<std::size_t>(generated.clusters[t] - 1));
    for (std::size_t j = 0; j < d.size(); ++j) dst[j] += scale * d[j];
  }
}

std::vector<int> ClusterToPhoneme(const LookupTable &table) {
  std::vector<int> map(table.num_clusters());
  for (std::size_t k = 0; k < map.size(); ++k) {
    map[k] = static_cast<int>(Argmax(table.logits().row(k)));
  }
  return map;
}

std::vector<int> Decode(std::span<const int> indices,
                        const LookupTable &table) {
  table.CheckIndices(indices);
  const std::vector<int> map = ClusterToPhoneme(table);
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out[i] = map[static_cast<std::size_t>(indices[i] - 1)];
  }
  return out;
}

}  // namespace phonegan

// phonegan/eval/metrics.h
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


#ifndef PHONEGAN_EVAL_METRICS_H_
#define PHONEGAN_EVAL_METRICS_H_

#include <cstdint>
#include <string>
#include <span>
#include <vector>

#include <json.hpp>

#include "phonegan/numcore/tensor.h"

namespace phonegan {

// Fraction of positions where pred == ref. Throws on a length mismatch.
double PhonemeAccuracy(std::span<const int> pred, std::span<const int> ref);

struct EvalReport {
  double accuracy = 0.0;
  std::size_t num_phonemes = 0;
  std::size_t n_segments = 0;
  // Row-major L x L counts, confusion[ref * L + pred].
  std::vector<std::uint64_t> confusion;

  std::uint64_t count(int ref, int pred) const {
    return confusion[static_cast<std::size_t>(ref) * num_phonemes +
                     static_cast<std::size_t>(pred)];
  }
  std::uint64_t trace() const;
  nlohmann::json ToJson() const;
};

EvalReport Evaluate(std::span<const int> pred, std::span<const int> ref,
                    std::size_t num_phonemes);

double RandomBaselineExpected(std::size_t num_phonemes);

// Uniform guesses over the L phonemes, one per reference position.
EvalReport BaselineRandom(std::span<const int> ref, std::size_t num_phonemes,
                          std::uint64_t seed);

// Predicts the modal reference label (lowest id on ties) everywhere.
EvalReport BaselineMostFrequent(std::span<const int> ref,
                                std::size_t num_phonemes);

// Per-position majority over models. `probabilities`, when given, holds
// one N x L matrix per model; ties go to the larger summed probability,
// then to the lowest id.
std::vector<int> EnsembleVote(std::span<const std::vector<int>> predictions,
                              std::span<const Tensor> probabilities = {});

}  // namespace phonegan

#endif  // PHONEGAN_EVAL_METRICS_H_

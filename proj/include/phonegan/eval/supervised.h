// phonegan/eval/supervised.h
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


// Supervised per-segment classifier: LSTM over the segment's frames, the
// final hidden state through a ReLU and a linear layer, cross-entropy.

#ifndef PHONEGAN_EVAL_SUPERVISED_H_
#define PHONEGAN_EVAL_SUPERVISED_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phonegan/numcore/lstm.h"

namespace phonegan {

struct SupervisedConfig {
  std::size_t hidden = 512;
  int epochs = 40;
  double lr = 0.01;
  std::size_t batch = 64;
  std::uint64_t seed = 0;
  AdamConfig adam;
};

struct LabeledSegments {
  std::span<const Tensor> segments;  // each t x d
  std::span<const int> labels;
};

struct SupervisedResult {
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;  // on the labeled subset used
  std::size_t train_used = 0;
  std::vector<std::string> warnings;  // e.g. phonemes absent from the subset
};

// Trains on a seeded random `fraction` of `train` and scores `test`.
// fraction must lie in (0, 1].
SupervisedResult SupervisedBaseline(const LabeledSegments &train,
                                    const LabeledSegments &test,
                                    double fraction, std::size_t num_phonemes,
                                    const SupervisedConfig &config);

}  // namespace phonegan

#endif  // PHONEGAN_EVAL_SUPERVISED_H_

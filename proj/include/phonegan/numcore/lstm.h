// phonegan/numcore/lstm.h
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


// Masked multi-step LSTM over a padded batch. Rows whose sequence has
// ended carry their last state forward unchanged.

#ifndef PHONEGAN_NUMCORE_LSTM_H_
#define PHONEGAN_NUMCORE_LSTM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "phonegan/numcore/adam.h"
#include "phonegan/numcore/ops.h"

namespace phonegan {

// Trainable LSTM weights as optimizer parameters.
class LstmLayer {
 public:
  LstmLayer() = default;
  LstmLayer(std::size_t input_dim, std::size_t hidden_dim);

  // Uniform in +-1/sqrt(hidden), forget-gate bias 1.
  void Initialize(Rng &rng);

  std::size_t input_dim() const { return wx.value.dim(0); }
  std::size_t hidden_dim() const { return wh.value.dim(0); }

  LstmParams View() const;
  void AddGrads(const LstmParams &grads);
  std::vector<Parameter *> parameters() { return {&wx, &wh, &b}; }

  Parameter wx, wh, b;
};

struct LstmSequenceCache {
  std::vector<LstmStepCache> steps;
  std::vector<std::vector<std::uint8_t>> active;  // [t][row]
  std::vector<Tensor> h;  // T + 1 masked hidden states, h[0] initial
  std::vector<Tensor> c;
};

// xs[t] is B x in. lengths[r] <= xs.size() is the true length of row r.
LstmSequenceCache LstmForward(const LstmParams &p, std::span<const Tensor> xs,
                              std::span<const std::size_t> lengths,
                              const Tensor &h0, const Tensor &c0);

struct LstmSequenceGrads {
  std::vector<Tensor> dxs;
  Tensor dh0, dc0;
};

// dhs, when non-empty, holds dLoss/dh[t + 1] for every step. dh_final and
// dc_final act on the last states h[T] and c[T].
LstmSequenceGrads LstmBackward(const LstmParams &p,
                               const LstmSequenceCache &cache,
                               std::span<const Tensor> dhs,
                               const Tensor &dh_final, const Tensor &dc_final,
                               LstmParams &grads);

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_LSTM_H_

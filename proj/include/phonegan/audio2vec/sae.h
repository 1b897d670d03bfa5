// phonegan/audio2vec/sae.h
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


// Sequence-to-sequence autoencoder over variable-length segments. The
// encoder's final hidden state is the segment embedding; the decoder
// starts from it and reconstructs the frames with teacher forcing.

#ifndef PHONEGAN_AUDIO2VEC_SAE_H_
#define PHONEGAN_AUDIO2VEC_SAE_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "phonegan/numcore/lstm.h"

namespace phonegan {

struct SaeConfig {
  std::size_t hidden = 512;
  int epochs = 300;
  double lr = 5e-4;
  std::size_t batch = 128;
  bool reverse_target = false;  // reconstruct frames last to first
  std::uint64_t seed = 0;
  AdamConfig adam;

  void Validate() const;
};

struct SaeModel {
  LstmLayer encoder;
  LstmLayer decoder;
  Parameter proj_w;  // hidden x input_dim
  Parameter proj_b;  // input_dim
  bool reverse_target = false;

  SaeModel() = default;
  SaeModel(std::size_t input_dim, std::size_t hidden);
  std::size_t input_dim() const { return proj_b.value.size(); }
  std::size_t hidden() const { return encoder.hidden_dim(); }
  std::vector<Parameter *> parameters();
};

struct SaeTrainResult {
  SaeModel model;
  std::vector<double> epoch_mse;  // mean over valid frames and dims
};

using SaeEpochCallback = std::function<void(int epoch, double mse)>;

// Segments are bucketed by length into batches; the batch order is
// shuffled each epoch. Throws DivergenceError naming the epoch on a
// non-finite loss.
SaeTrainResult SaeTrain(std::span<const Tensor> segments,
                        const SaeConfig &config,
                        const SaeEpochCallback &on_epoch = nullptr);

// Mean reconstruction MSE of the model on the given segments.
double SaeReconstructionMse(const SaeModel &model,
                            std::span<const Tensor> segments);

std::vector<double> Encode(const Tensor &segment, const SaeModel &model);
// N x hidden, one row per segment.
Tensor EncodeAll(std::span<const Tensor> segments, const SaeModel &model);

// JSON checkpoint: {"format": "phonegan-sae", "version": 1, "input_dim",
// "hidden", "reverse_target", "tensors": {name: {"shape", "data"}}} with
// tensor names encoder.wx, encoder.wh, encoder.b, decoder.wx, decoder.wh,
// decoder.b, proj.w, proj.b.
void SaveSae(std::ostream &os, const SaeModel &model);
SaeModel LoadSae(std::istream &is);

}  // namespace phonegan

#endif  // PHONEGAN_AUDIO2VEC_SAE_H_

// phonegan/ganmap/discriminator.h
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

#ifndef PHONEGAN_GANMAP_DISCRIMINATOR_H_
#define PHONEGAN_GANMAP_DISCRIMINATOR_H_

#include <span>
#include <vector>

#include "phonegan/ganmap/generator.h"
#include "phonegan/numcore/adam.h"
#include "phonegan/numcore/rng.h"
#include "phonegan/numcore/tensor.h"

namespace phonegan {

struct DiscriminatorConfig {
  std::vector<std::size_t> branch_widths{3, 5, 7, 9};
  std::size_t branch_channels = 256;
  std::size_t conv2_width = 3;
  std::size_t conv2_channels = 1024;
  double leaky_slope = 0.2;
};

// Intermediates of one forward pass over a batch. Sequences are packed
// into one matrix, each cut to its last valid row and separated by
// zero rows wide enough that no convolution tap crosses into a neighbour.
// Backward() additionally stores the pre-activation gradients that the
// gradient-penalty pass differentiates through.
struct DiscriminatorCache {
  struct Segment {
    std::size_t start = 0;       // first packed row
    std::size_t rows = 0;        // rows actually computed
    std::size_t input_rows = 0;  // rows of the caller's sequence
    double count = 0.0;          // number of valid rows
  };
  std::vector<Segment> segments;
  Eigen::VectorXd mask;  // packed rows
  Tensor x, z1, a1, z2, a2;
  RowMatrix pooled;  // segments x conv2 channels
  std::vector<double> scores;
  Tensor dz1, dz2;
};

// Two-layer 1-D CNN critic: parallel same-padded convolutions of several
// widths (outputs concatenated), a second convolution, leaky-ReLU after
// each, masked mean-pool over time and a linear head. Masked rows are
// zeroed at the input and after every activation, so padding a sequence
// with masked rows leaves the score unchanged.
class Discriminator {
 public:
  Discriminator(std::size_t num_phonemes, DiscriminatorConfig config);
  // Fan-in scaled uniform initialization.
  Discriminator(std::size_t num_phonemes, DiscriminatorConfig config,
                Rng &rng);

  const DiscriminatorConfig &config() const { return config_; }
  std::size_t num_phonemes() const { return num_phonemes_; }
  std::size_t layer1_channels() const {
    return config_.branch_channels * config_.branch_widths.size();
  }

  std::vector<Parameter *> parameters();
  void ZeroGrad();
  void SetZero();
  std::size_t num_parameters() const;

  Parameter &branch_weight(std::size_t b) { return w1_[b]; }
  Parameter &branch_bias(std::size_t b) { return b1_[b]; }
  Parameter &conv2_weight() { return w2_; }
  Parameter &conv2_bias() { return b2_; }
  Parameter &head_weight() { return head_w_; }
  Parameter &head_bias() { return head_b_; }

  double Score(const PhonemeVectorSequence &seq) const;
  double Forward(const PhonemeVectorSequence &seq,
                 DiscriminatorCache &cache) const;
  std::vector<double> Forward(std::span<const PhonemeVectorSequence> batch,
                              DiscriminatorCache &cache) const;

  // Backpropagates dout (one value per sequence). Parameter gradients are
  // accumulated when `param_grads` is set; dx (one tensor per sequence,
  // shaped like its input) receives the input gradients when non-null.
  void Backward(DiscriminatorCache &cache, std::span<const double> dout,
                bool param_grads, std::vector<Tensor> *dx);
  void Backward(DiscriminatorCache &cache, double dout, bool param_grads,
                Tensor *dx);

  // Given the input gradients g = dScore/dx computed by Backward with
  // dout = 1 and upstream gradients u = dP/dg, accumulates dP/dtheta. The
  // critic is piecewise linear in its input, so activation masks are
  // constant almost everywhere and only the linear maps are
  // differentiated.
  void PenaltyBackward(const DiscriminatorCache &cache,
                       std::span<const Tensor> u);
  void PenaltyBackward(const DiscriminatorCache &cache, const Tensor &u);

 private:
  void Init(Rng *rng);
  std::size_t gap() const;

  std::size_t num_phonemes_;
  DiscriminatorConfig config_;
  std::vector<Parameter> w1_, b1_;
  Parameter w2_, b2_, head_w_, head_b_;
};

}  // namespace phonegan

#endif  // PHONEGAN_GANMAP_DISCRIMINATOR_H_

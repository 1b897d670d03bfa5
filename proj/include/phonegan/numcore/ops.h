// phonegan/numcore/ops.h
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

// Layer kernels with explicit forward and backward passes. Sequences are
// laid out time-major as (T x channels) row-major matrices.

#ifndef PHONEGAN_NUMCORE_OPS_H_
#define PHONEGAN_NUMCORE_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "phonegan/numcore/rng.h"
#include "phonegan/numcore/tensor.h"

namespace phonegan {

using MatRef = Eigen::Ref<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstMatRef = Eigen::Ref<const RowMatrix, 0, Eigen::OuterStride<>>;

// ---------------------------------------------------------------------------
// Softmax family.

std::vector<double> Softmax(std::span<const double> logits);
// dx = y * (dy - <y, dy>).
std::vector<double> SoftmaxBackward(std::span<const double> y,
                                    std::span<const double> dy);

struct CrossEntropyResult {
  double loss;
  std::vector<double> dlogits;
};
CrossEntropyResult SoftmaxCrossEntropy(std::span<const double> logits,
                                       std::size_t label);

// Gumbel noise is -log(-log(u)) with u clamped to [1e-12, 1 - 1e-12].
double GumbelNoise(Rng &rng);

struct GumbelSample {
  std::vector<double> soft;  // softmax(inv_temp * (logits + g))
  std::vector<double> hard;  // one-hot at argmax(soft)
  std::size_t index = 0;
};
GumbelSample GumbelSoftmax(std::span<const double> logits, double inv_temp,
                           Rng &rng);
// Straight-through: the gradient arriving at `hard` is applied to `soft`.
std::vector<double> GumbelSoftmaxBackward(const GumbelSample &sample,
                                          double inv_temp,
                                          std::span<const double> dhard);

// Lowest index wins ties.
std::size_t Argmax(std::span<const double> v);

// ---------------------------------------------------------------------------
// Elementwise.

Tensor LeakyRelu(const Tensor &x, double slope);
Tensor LeakyReluBackward(const Tensor &x, const Tensor &dy, double slope);
void CheckLeakySlope(double slope);

double Sigmoid(double x);

// ---------------------------------------------------------------------------
// Affine: y = x W + b, x is (B x in), W is (in x out), b is (out).

Tensor Affine(const Tensor &x, const Tensor &w, const Tensor &b);
struct AffineGrads {
  Tensor dx, dw, db;
};
AffineGrads AffineBackward(const Tensor &x, const Tensor &w, const Tensor &dy);

// ---------------------------------------------------------------------------
// 1-D convolution (cross-correlation). Kernels are (width x Cin x Cout).
// kSame zero-pads (width-1)/2 frames on both sides and requires odd width.

enum class Padding { kSame, kValid };

std::size_t ConvOutputLength(std::size_t input_length, std::size_t width,
                             Padding padding);

// y += conv(x, w); y must have ConvOutputLength rows.
void Conv1dAccumulate(ConstMatRef x, const Tensor &w, Padding padding,
                      MatRef y);
// dx += dL/dx given dy.
void Conv1dAccumulateInputGrad(ConstMatRef dy, const Tensor &w,
                               Padding padding, MatRef dx);
// dw += dL/dw given the layer input x and dy.
void Conv1dAccumulateWeightGrad(ConstMatRef x, ConstMatRef dy, Padding padding,
                                Tensor &dw);

// Tensor-level wrappers; `bias` may be empty.
Tensor Conv1d(const Tensor &x, const Tensor &w, const Tensor &bias,
              Padding padding);
struct Conv1dGrads {
  Tensor dx, dw, db;
};
Conv1dGrads Conv1dBackward(const Tensor &x, const Tensor &w, const Tensor &dy,
                           Padding padding);

// ---------------------------------------------------------------------------
// LSTM cell. Gate blocks along the 4H axis are ordered input, forget,
// candidate, output. All state tensors are (B x H).

struct LstmParams {
  Tensor wx;  // in x 4H
  Tensor wh;  // H x 4H
  Tensor b;   // 4H

  LstmParams() = default;
  LstmParams(std::size_t input_dim, std::size_t hidden_dim);
  std::size_t input_dim() const { return wx.dim(0); }
  std::size_t hidden_dim() const { return wh.dim(0); }
  void SetZero();
};

struct LstmStepCache {
  Tensor x, h_prev, c_prev;
  Tensor gates;   // activated gates, B x 4H
  Tensor c, tanh_c;
  Tensor h;
};

LstmStepCache LstmStep(const LstmParams &p, const Tensor &x,
                       const Tensor &h_prev, const Tensor &c_prev);

struct LstmStepGrads {
  Tensor dx, dh_prev, dc_prev;
};
// Accumulates parameter gradients into `grads`.
LstmStepGrads LstmStepBackward(const LstmParams &p, const LstmStepCache &cache,
                               const Tensor &dh, const Tensor &dc,
                               LstmParams &grads);

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_OPS_H_

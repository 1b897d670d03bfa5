// phonegan/numcore/adam.h
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

#ifndef PHONEGAN_NUMCORE_ADAM_H_
#define PHONEGAN_NUMCORE_ADAM_H_

#include <vector>

#include "phonegan/numcore/tensor.h"

namespace phonegan {

struct Parameter {
  Tensor value;
  Tensor grad;

  Parameter() = default;
  explicit Parameter(Tensor v) : value(std::move(v)), grad(value.shape()) {}
  void ZeroGrad() { grad.SetZero(); }
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Track one second moment per tensor (the mean squared gradient)
  // instead of one per element. The update then keeps the direction of
  // the gradient and only rescales its length.
  bool tensor_second_moment = false;
};

struct AdamState {
  Tensor m;
  Tensor v;
  long t = 0;
  AdamConfig config;

  AdamState() = default;
  AdamState(const Shape &shape, AdamConfig cfg = {})
      : m(shape), v(shape), config(cfg) {}
};

// One bias-corrected Adam step. Throws NonFiniteError if the gradient has a
// NaN/Inf, leaving both the parameter and the state untouched. Does not
// clear the gradient.
void AdamUpdate(Parameter &param, AdamState &state, double lr);

// Adam over a fixed set of parameters; Step() updates all and zeroes grads.
class Adam {
 public:
  Adam(std::vector<Parameter *> params, double lr, AdamConfig config = {});

  void Step();
  void ZeroGrad();
  double lr() const { return lr_; }
  long steps() const { return states_.empty() ? 0 : states_.front().t; }

 private:
  std::vector<Parameter *> params_;
  std::vector<AdamState> states_;
  double lr_;
};

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_ADAM_H_

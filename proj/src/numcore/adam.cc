// numcore/adam.cc
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

#include "phonegan/numcore/adam.h"

#include <cmath>

#include "phonegan/numcore/error.h"

namespace phonegan {

void AdamUpdate(Parameter &param, AdamState &state, double lr) {
  CheckShape(param.grad, param.value.shape(), "adam gradient");
  CheckShape(state.m, param.value.shape(), "adam first moment");
  CheckShape(state.v, param.value.shape(), "adam second moment");
  if (!param.grad.AllFinite()) {
    throw NonFiniteError("adam: non-finite gradient");
  }
  const AdamConfig &c = state.config;
  state.t += 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  auto value = param.value.data();
  auto grad = param.grad.data();
  auto m = state.m.data();
  auto v = state.v.data();
  double mean_sq = 0.0;
  if (c.tensor_second_moment) {
    for (double g : grad) mean_sq += g * g;
    mean_sq /= static_cast<double>(grad.size());
  }
  for (std::size_t i = 0; i < value.size(); ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
    const double g2 = c.tensor_second_moment ? mean_sq : grad[i] * grad[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g2;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    value[i] -= lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

Adam::Adam(std::vector<Parameter *> params, double lr, AdamConfig config)
    : params_(std::move(params)), lr_(lr) {
  states_.reserve(params_.size());
  for (Parameter *p : params_) states_.emplace_back(p->value.shape(), config);
}

void Adam::Step() {
  for (Parameter *p : params_) {
    if (!p->grad.AllFinite()) throw NonFiniteError("adam: non-finite gradient");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    AdamUpdate(*params_[i], states_[i], lr_);
  }
  ZeroGrad();
}

void Adam::ZeroGrad() {
  for (Parameter *p : params_) p->ZeroGrad();
}

}  // namespace phonegan

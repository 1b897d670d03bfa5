// numcore/lstm.cc
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


#include "phonegan/numcore/lstm.h"

#include <cmath>
#include <stdexcept>

#include "phonegan/numcore/error.h"

namespace phonegan {

LstmLayer::LstmLayer(std::size_t input_dim, std::size_t hidden_dim)
    : wx(Tensor({input_dim, 4 * hidden_dim})),
      wh(Tensor({hidden_dim, 4 * hidden_dim})),
      b(Tensor({4 * hidden_dim})) {}

void LstmLayer::Initialize(Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim()));
  for (double &v : wx.value.data()) v = rng.Uniform(-bound, bound);
  for (double &v : wh.value.data()) v = rng.Uniform(-bound, bound);
  b.value.SetZero();
  const std::size_t h = hidden_dim();
  for (std::size_t j = 0; j < h; ++j) b.value[h + j] = 1.0;
}

LstmParams LstmLayer::View() const {
  LstmParams p;
  p.wx = wx.value;
  p.wh = wh.value;
  p.b = b.value;
  return p;
}

void LstmLayer::AddGrads(const LstmParams &grads) {
  wx.grad += grads.wx;
  wh.grad += grads.wh;
  b.grad += grads.b;
}

LstmSequenceCache LstmForward(const LstmParams &p, std::span<const Tensor> xs,
                              std::span<const std::size_t> lengths,
                              const Tensor &h0, const Tensor &c0) {
  const std::size_t batch = lengths.size();
  CheckShape(h0, {batch, p.hidden_dim()}, "lstm initial hidden state");
  CheckShape(c0, {batch, p.hidden_dim()}, "lstm initial cell state");
  for (std::size_t len : lengths) {
    if (len > xs.size()) {
      throw std::invalid_argument("lstm: sequence length " +
                                  std::to_string(len) + " exceeds " +
                                  std::to_string(xs.size()) + " steps");
    }
  }
  LstmSequenceCache cache;
  cache.h.push_back(h0);
  cache.c.push_back(c0);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    LstmStepCache step = LstmStep(p, xs[t], cache.h.back(), cache.c.back());
    std::vector<std::uint8_t> active(batch);
    Tensor h = step.h, c = step.c;
    for (std::size_t r = 0; r < batch; ++r) {
      active[r] = t < lengths[r] ? 1 : 0;
      if (!active[r]) {
        h.matrix().row(r) = cache.h.back().matrix().row(r);
        c.matrix().row(r) = cache.c.back().matrix().row(r);
      }
    }
    cache.steps.push_back(std::move(step));
    cache.active.push_back(std::move(active));
    cache.h.push_back(std::move(h));
    cache.c.push_back(std::move(c));
  }
  return cache;
}

LstmSequenceGrads LstmBackward(const LstmParams &p,
                               const LstmSequenceCache &cache,
                               std::span<const Tensor> dhs,
                               const Tensor &dh_final, const Tensor &dc_final,
                               LstmParams &grads) {
  const std::size_t steps = cache.steps.size();
  if (!dhs.empty() && dhs.size() != steps) {
    throw std::invalid_argument("lstm backward: expected " +
                                std::to_string(steps) +
                                " hidden-state gradients, got " +
                                std::to_string(dhs.size()));
  }
  LstmSequenceGrads out;
  out.dxs.resize(steps);
  Tensor dh = dh_final, dc = dc_final;
  for (std::size_t t = steps; t-- > 0;) {
    if (!dhs.empty()) dh += dhs[t];
    const auto &active = cache.active[t];
    Tensor dh_step = dh, dc_step = dc;
    for (std::size_t r = 0; r < active.size(); ++r) {
      if (active[r]) {
        dh.matrix().row(r).setZero();
        dc.matrix().row(r).setZero();
      } else {
        dh_step.matrix().row(r).setZero();
        dc_step.matrix().row(r).setZero();
      }
    }
    LstmStepGrads g =
        LstmStepBackward(p, cache.steps[t], dh_step, dc_step, grads);
    dh += g.dh_prev;
    dc += g.dc_prev;
    out.dxs[t] = std::move(g.dx);
  }
  out.dh0 = std::move(dh);
  out.dc0 = std::move(dc);
  return out;
}

}  // namespace phonegan

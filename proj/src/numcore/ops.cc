// numcore/ops.cc
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

#include "phonegan/numcore/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "phonegan/numcore/error.h"

namespace phonegan {

namespace {

void CheckFinite(std::span<const double> v, const char *what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NonFiniteError(std::string(what) + ": non-finite input at index " +
                           std::to_string(i));
    }
  }
}

std::string Dims(long rows, long cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

struct ConvGeometry {
  long width, cin, cout, pad;
};

ConvGeometry Geometry(const Tensor &w, Padding padding) {
  if (w.rank() != 3) {
    throw ShapeError("conv1d: kernel must be width x Cin x Cout, got " +
                     ShapeToString(w.shape()));
  }
  ConvGeometry g{static_cast<long>(w.dim(0)), static_cast<long>(w.dim(1)),
                 static_cast<long>(w.dim(2)), 0};
  if (padding == Padding::kSame) {
    if (g.width % 2 == 0) {
      throw ShapeError("conv1d: same padding needs an odd kernel width, got " +
                       std::to_string(g.width));
    }
    g.pad = (g.width - 1) / 2;
  }
  return g;
}

ConstMatrixMap Tap(const Tensor &w, const ConvGeometry &g, long j) {
  return ConstMatrixMap(w.data().data() + j * g.cin * g.cout, g.cin, g.cout);
}

// Rows [t0, t1) of the output that read input row t + shift.
void TapRange(long shift, long in_len, long out_len, long *t0, long *t1) {
  *t0 = std::max(0L, -shift);
  *t1 = std::min(out_len, in_len - shift);
}

void CheckConvShapes(const ConvGeometry &g, Padding padding, long in_len,
                     long in_ch, long out_len, long out_ch) {
  if (in_ch != g.cin) {
    throw ShapeError("conv1d: input has " + std::to_string(in_ch) +
                     " channels, kernel expects " + std::to_string(g.cin));
  }
  if (padding == Padding::kValid && in_len < g.width) {
    throw ShapeError("conv1d: valid padding needs T >= width, got T=" +
                     std::to_string(in_len) + " width=" +
                     std::to_string(g.width));
  }
  const long expect_len = static_cast<long>(ConvOutputLength(
      static_cast<std::size_t>(in_len), static_cast<std::size_t>(g.width),
      padding));
  if (out_len != expect_len || out_ch != g.cout) {
    throw ShapeError("conv1d: output expected " + Dims(expect_len, g.cout) +
                     ", got " + Dims(out_len, out_ch));
  }
}

}  // namespace

std::vector<double> Softmax(std::span<const double> logits) {
  CheckFinite(logits, "softmax");
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (double &v : out) v /= sum;
  return out;
}

std::vector<double> SoftmaxBackward(std::span<const double> y,
                                    std::span<const double> dy) {
  double dot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * dy[i];
  std::vector<double> dx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (dy[i] - dot);
  return dx;
}

CrossEntropyResult SoftmaxCrossEntropy(std::span<const double> logits,
                                       std::size_t label) {
  if (label >= logits.size()) {
    throw std::invalid_argument("cross entropy: label " +
                                std::to_string(label) + " out of range");
  }
  CrossEntropyResult r;
  r.dlogits = Softmax(logits);
  r.loss = -std::log(std::max(r.dlogits[label], 1e-300));
  r.dlogits[label] -= 1.0;
  return r;
}

double GumbelNoise(Rng &rng) {
  const double u = std::clamp(rng.Uniform(), 1e-12, 1.0 - 1e-12);
  return -std::log(-std::log(u));
}

std::size_t Argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

GumbelSample GumbelSoftmax(std::span<const double> logits, double inv_temp,
                           Rng &rng) {
  if (!(inv_temp > 0.0)) {
    throw std::invalid_argument("gumbel softmax: inverse temperature must be "
                                "positive, got " +
                                std::to_string(inv_temp));
  }
  CheckFinite(logits, "gumbel softmax");
  std::vector<double> perturbed(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    perturbed[i] = inv_temp * (logits[i] + GumbelNoise(rng));
  }
  GumbelSample s;
  s.soft = Softmax(perturbed);
  s.index = Argmax(s.soft);
  s.hard.assign(logits.size(), 0.0);
  s.hard[s.index] = 1.0;
  return s;
}

std::vector<double> GumbelSoftmaxBackward(const GumbelSample &sample,
                                          double inv_temp,
                                          std::span<const double> dhard) {
  std::vector<double> d = SoftmaxBackward(sample.soft, dhard);
  for (double &v : d) v *= inv_temp;
  return d;
}

void CheckLeakySlope(double slope) {
  if (!(slope > 0.0 && slope < 1.0)) {
    throw std::invalid_argument("leaky relu: slope must lie in (0,1), got " +
                                std::to_string(slope));
  }
}

Tensor LeakyRelu(const Tensor &x, double slope) {
  CheckLeakySlope(slope);
  CheckFinite(x.data(), "leaky relu");
  Tensor y = Tensor::ZerosLike(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
  }
  return y;
}

Tensor LeakyReluBackward(const Tensor &x, const Tensor &dy, double slope) {
  CheckShape(dy, x.shape(), "leaky relu backward");
  Tensor dx = Tensor::ZerosLike(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    dx[i] = x[i] >= 0.0 ? dy[i] : slope * dy[i];
  }
  return dx;
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor Affine(const Tensor &x, const Tensor &w, const Tensor &b) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0)) {
    throw ShapeError("affine: input " + ShapeToString(x.shape()) +
                     " incompatible with weights " + ShapeToString(w.shape()));
  }
  Tensor y({x.dim(0), w.dim(1)});
  y.matrix().noalias() = x.matrix() * w.matrix();
  if (!b.empty()) {
    CheckShape(b, {w.dim(1)}, "affine bias");
    y.matrix().rowwise() += b.vector().transpose();
  }
  return y;
}

AffineGrads AffineBackward(const Tensor &x, const Tensor &w, const Tensor &dy) {
  CheckShape(dy, {x.dim(0), w.dim(1)}, "affine backward");
  AffineGrads g{Tensor::ZerosLike(x), Tensor::ZerosLike(w), Tensor({w.dim(1)})};
  g.dx.matrix().noalias() = dy.matrix() * w.matrix().transpose();
  g.dw.matrix().noalias() = x.matrix().transpose() * dy.matrix();
  g.db.vector() = dy.matrix().colwise().sum().transpose();
  return g;
}

std::size_t ConvOutputLength(std::size_t input_length, std::size_t width,
                             Padding padding) {
  if (padding == Padding::kSame) return input_length;
  return input_length >= width ? input_length - width + 1 : 0;
}

void Conv1dAccumulate(ConstMatRef x, const Tensor &w, Padding padding,
                      MatRef y) {
  const ConvGeometry g = Geometry(w, padding);
  CheckConvShapes(g, padding, x.rows(), x.cols(), y.rows(), y.cols());
  for (long j = 0; j < g.width; ++j) {
    const long shift = j - g.pad;
    long t0, t1;
    TapRange(shift, x.rows(), y.rows(), &t0, &t1);
    if (t1 <= t0) continue;
    y.middleRows(t0, t1 - t0).noalias() +=
        x.middleRows(t0 + shift, t1 - t0) * Tap(w, g, j);
  }
}

void Conv1dAccumulateInputGrad(ConstMatRef dy, const Tensor &w,
                               Padding padding, MatRef dx) {
  const ConvGeometry g = Geometry(w, padding);
  CheckConvShapes(g, padding, dx.rows(), dx.cols(), dy.rows(), dy.cols());
  for (long j = 0; j < g.width; ++j) {
    const long shift = j - g.pad;
    long t0, t1;
    TapRange(shift, dx.rows(), dy.rows(), &t0, &t1);
    if (t1 <= t0) continue;
    dx.middleRows(t0 + shift, t1 - t0).noalias() +=
        dy.middleRows(t0, t1 - t0) * Tap(w, g, j).transpose();
  }
}

void Conv1dAccumulateWeightGrad(ConstMatRef x, ConstMatRef dy, Padding padding,
                                Tensor &dw) {
  const ConvGeometry g = Geometry(dw, padding);
  CheckConvShapes(g, padding, x.rows(), x.cols(), dy.rows(), dy.cols());
  for (long j = 0; j < g.width; ++j) {
    const long shift = j - g.pad;
    long t0, t1;
    TapRange(shift, x.rows(), dy.rows(), &t0, &t1);
    if (t1 <= t0) continue;
    MatrixMap tap(dw.data().data() + j * g.cin * g.cout, g.cin, g.cout);
    tap.noalias() += x.middleRows(t0 + shift, t1 - t0).transpose() *
                     dy.middleRows(t0, t1 - t0);
  }
}

Tensor Conv1d(const Tensor &x, const Tensor &w, const Tensor &bias,
              Padding padding) {
  if (x.rank() != 2) {
    throw ShapeError("conv1d: input must be T x Cin, got " +
                     ShapeToString(x.shape()));
  }
  const ConvGeometry g = Geometry(w, padding);
  if (padding == Padding::kValid && static_cast<long>(x.dim(0)) < g.width) {
    throw ShapeError("conv1d: valid padding needs T >= width, got T=" +
                     std::to_string(x.dim(0)) + " width=" +
                     std::to_string(g.width));
  }
  Tensor y({ConvOutputLength(x.dim(0), w.dim(0), padding), w.dim(2)});
  Conv1dAccumulate(x.matrix(), w, padding, y.matrix());
  if (!bias.empty()) {
    CheckShape(bias, {w.dim(2)}, "conv1d bias");
    y.matrix().rowwise() += bias.vector().transpose();
  }
  return y;
}

Conv1dGrads Conv1dBackward(const Tensor &x, const Tensor &w, const Tensor &dy,
                           Padding padding) {
  Conv1dGrads g{Tensor::ZerosLike(x), Tensor::ZerosLike(w), Tensor({w.dim(2)})};
  Conv1dAccumulateInputGrad(dy.matrix(), w, padding, g.dx.matrix());
  Conv1dAccumulateWeightGrad(x.matrix(), dy.matrix(), padding, g.dw);
  g.db.vector() = dy.matrix().colwise().sum().transpose();
  return g;
}

LstmParams::LstmParams(std::size_t input_dim, std::size_t hidden_dim)
    : wx({input_dim, 4 * hidden_dim}),
      wh({hidden_dim, 4 * hidden_dim}),
      b({4 * hidden_dim}) {}

void LstmParams::SetZero() {
  wx.SetZero();
  wh.SetZero();
  b.SetZero();
}

LstmStepCache LstmStep(const LstmParams &p, const Tensor &x,
                       const Tensor &h_prev, const Tensor &c_prev) {
  const std::size_t hidden = p.hidden_dim();
  if (x.rank() != 2 || x.dim(1) != p.input_dim()) {
    throw ShapeError("lstm: input " + ShapeToString(x.shape()) +
                     " does not match input dim " +
                     std::to_string(p.input_dim()));
  }
  const std::size_t batch = x.dim(0);
  CheckShape(h_prev, {batch, hidden}, "lstm hidden state");
  CheckShape(c_prev, {batch, hidden}, "lstm cell state");

  LstmStepCache cache{x, h_prev, c_prev, Tensor({batch, 4 * hidden}),
                      Tensor({batch, hidden}), Tensor({batch, hidden}),
                      Tensor({batch, hidden})};
  auto gates = cache.gates.matrix();
  gates.noalias() = x.matrix() * p.wx.matrix();
  gates.noalias() += h_prev.matrix() * p.wh.matrix();
  gates.rowwise() += p.b.vector().transpose();
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t j = 0; j < hidden; ++j) {
      const double ig = Sigmoid(gates(r, j));
      const double fg = Sigmoid(gates(r, hidden + j));
      const double cand = std::tanh(gates(r, 2 * hidden + j));
      const double og = Sigmoid(gates(r, 3 * hidden + j));
      gates(r, j) = ig;
      gates(r, hidden + j) = fg;
      gates(r, 2 * hidden + j) = cand;
      gates(r, 3 * hidden + j) = og;
      const double c = fg * c_prev.at(r, j) + ig * cand;
      const double tc = std::tanh(c);
      cache.c.at(r, j) = c;
      cache.tanh_c.at(r, j) = tc;
      cache.h.at(r, j) = og * tc;
    }
  }
  return cache;
}

LstmStepGrads LstmStepBackward(const LstmParams &p, const LstmStepCache &cache,
                               const Tensor &dh, const Tensor &dc,
                               LstmParams &grads) {
  const std::size_t hidden = p.hidden_dim();
  const std::size_t batch = cache.x.dim(0);
  CheckShape(dh, {batch, hidden}, "lstm backward dh");
  CheckShape(dc, {batch, hidden}, "lstm backward dc");

  Tensor dgates({batch, 4 * hidden});
  LstmStepGrads out{Tensor::ZerosLike(cache.x), Tensor({batch, hidden}),
                    Tensor({batch, hidden})};
  for (std::size_t r = 0; r < batch; ++r) {
    for (std::size_t j = 0; j < hidden; ++j) {
      const double ig = cache.gates.at(r, j);
      const double fg = cache.gates.at(r, hidden + j);
      const double cand = cache.gates.at(r, 2 * hidden + j);
      const double og = cache.gates.at(r, 3 * hidden + j);
      const double tc = cache.tanh_c.at(r, j);
      const double dhv = dh.at(r, j);
      const double dcv = dc.at(r, j) + dhv * og * (1.0 - tc * tc);
      dgates.at(r, j) = dcv * cand * ig * (1.0 - ig);
      dgates.at(r, hidden + j) = dcv * cache.c_prev.at(r, j) * fg * (1.0 - fg);
      dgates.at(r, 2 * hidden + j) = dcv * ig * (1.0 - cand * cand);
      dgates.at(r, 3 * hidden + j) = dhv * tc * og * (1.0 - og);
      out.dc_prev.at(r, j) = dcv * fg;
    }
  }
  grads.wx.matrix().noalias() += cache.x.matrix().transpose() * dgates.matrix();
  grads.wh.matrix().noalias() +=
      cache.h_prev.matrix().transpose() * dgates.matrix();
  grads.b.vector() += dgates.matrix().colwise().sum().transpose();
  out.dx.matrix().noalias() = dgates.matrix() * p.wx.matrix().transpose();
  out.dh_prev.matrix().noalias() = dgates.matrix() * p.wh.matrix().transpose();
  return out;
}

}  // namespace phonegan

// audio2vec/sae.cc
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


#include "phonegan/audio2vec/sae.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "phonegan/numcore/error.h"

namespace phonegan {

namespace {

struct Batch {
  std::vector<std::size_t> lengths;
  std::vector<Tensor> inputs;   // encoder inputs, T x (B x D)
  std::vector<Tensor> targets;  // decoder targets, T x (B x D)
  std::size_t valid = 0;        // number of real frames
};

Batch MakeBatch(std::span<const Tensor> segments,
                std::span<const std::size_t> members, std::size_t dim,
                bool reverse) {
  Batch b;
  std::size_t steps = 0;
  for (std::size_t m : members) {
    if (segments[m].rank() != 2 || segments[m].dim(1) != dim) {
      throw ShapeError("sae: segment " + std::to_string(m) + " has shape " +
                       ShapeToString(segments[m].shape()) +
                       ", expected frames of dim " + std::to_string(dim));
    }
    const std::size_t len = segments[m].dim(0);
    if (len == 0) throw std::invalid_argument("sae: empty segment");
    b.lengths.push_back(len);
    b.valid += len;
    steps = std::max(steps, len);
  }
  const std::size_t rows = members.size();
  b.inputs.assign(steps, Tensor({rows, dim}));
  b.targets.assign(steps, Tensor({rows, dim}));
  for (std::size_t r = 0; r < rows; ++r) {
    const Tensor &seg = segments[members[r]];
    const std::size_t len = b.lengths[r];
    for (std::size_t t = 0; t < len; ++t) {
      const std::size_t src = reverse ? len - 1 - t : t;
      b.inputs[t].matrix().row(r) = seg.matrix().row(t);
      b.targets[t].matrix().row(r) = seg.matrix().row(src);
    }
  }
  return b;
}

// Sum of squared reconstruction errors over the batch's valid frames.
// With `model_grads`, accumulates d(sse * grad_scale)/dtheta.
double RunBatch(const SaeModel &model, const Batch &b, double grad_scale,
                SaeModel *model_grads) {
  const std::size_t rows = b.lengths.size();
  const std::size_t steps = b.inputs.size();
  const std::size_t hidden = model.hidden();
  const std::size_t dim = model.input_dim();
  const LstmParams pe = model.encoder.View();
  const LstmParams pd = model.decoder.View();
  const Tensor zeros({rows, hidden});

  const LstmSequenceCache enc = LstmForward(pe, b.inputs, b.lengths, zeros, zeros);
  std::vector<Tensor> dec_in(steps, Tensor({rows, dim}));
  for (std::size_t t = 1; t < steps; ++t) dec_in[t] = b.targets[t - 1];
  const LstmSequenceCache dec =
      LstmForward(pd, dec_in, b.lengths, enc.h.back(), zeros);

  double sse = 0.0;
  std::vector<Tensor> dhs;
  if (model_grads) dhs.reserve(steps);
  const auto w = model.proj_w.value.matrix();
  const auto bias = model.proj_b.value.vector();
  for (std::size_t t = 0; t < steps; ++t) {
    RowMatrix y = dec.h[t + 1].matrix() * w;
    y.rowwise() += bias.transpose();
    RowMatrix diff = y - b.targets[t].matrix();
    for (std::size_t r = 0; r < rows; ++r) {
      if (t >= b.lengths[r]) diff.row(r).setZero();
    }
    sse += diff.squaredNorm();
    if (model_grads) {
      const RowMatrix dy = (2.0 * grad_scale) * diff;
      model_grads->proj_w.grad.matrix().noalias() +=
          dec.h[t + 1].matrix().transpose() * dy;
      model_grads->proj_b.grad.vector() += dy.colwise().sum().transpose();
      Tensor dh({rows, hidden});
      dh.matrix().noalias() = dy * w.transpose();
      dhs.push_back(std::move(dh));
    }
  }
  if (model_grads) {
    LstmParams gd(dim, hidden), ge(dim, hidden);
    const LstmSequenceGrads dg = LstmBackward(pd, dec, dhs, zeros, zeros, gd);
    LstmBackward(pe, enc, {}, dg.dh0, zeros, ge);
    model_grads->decoder.AddGrads(gd);
    model_grads->encoder.AddGrads(ge);
  }
  return sse;
}

void ToJson(nlohmann::json &obj, const char *name, const Tensor &t) {
  obj[name] = {{"shape", t.shape()}, {"data", t.values()}};
}

void FromJson(const nlohmann::json &obj, const char *name, Tensor &t) {
  const auto &entry = obj.at(name);
  const Shape shape = entry.at("shape").get<Shape>();
  if (shape != t.shape()) {
    throw std::invalid_argument(std::string("sae checkpoint: tensor '") + name +
                                "' has shape " + ShapeToString(shape) +
                                ", expected " + ShapeToString(t.shape()));
  }
  t = Tensor(shape, entry.at("data").get<std::vector<double>>());
}

}  // namespace

void SaeConfig::Validate() const {
  if (hidden < 1 || epochs < 0 || !(lr > 0.0) || batch < 1) {
    throw std::invalid_argument(
        "sae config: hidden, lr and batch must be positive");
  }
}

SaeModel::SaeModel(std::size_t input_dim, std::size_t hidden)
    : encoder(input_dim, hidden),
      decoder(input_dim, hidden),
      proj_w(Tensor({hidden, input_dim})),
      proj_b(Tensor({input_dim})) {}

std::vector<Parameter *> SaeModel::parameters() {
  std::vector<Parameter *> out = encoder.parameters();
  for (Parameter *p : decoder.parameters()) out.push_back(p);
  out.push_back(&proj_w);
  out.push_back(&proj_b);
  return out;
}

SaeTrainResult SaeTrain(std::span<const Tensor> segments,
                        const SaeConfig &config,
                        const SaeEpochCallback &on_epoch) {
  config.Validate();
  if (segments.empty()) throw std::invalid_argument("sae: empty corpus");
  if (segments.front().rank() != 2) {
    throw ShapeError("sae: segments must be frame matrices");
  }
  const std::size_t dim = segments.front().dim(1);
  Rng root(config.seed);
  Rng init_rng = root.Derive("init");
  Rng order_rng = root.Derive("order");

  SaeTrainResult result{SaeModel(dim, config.hidden), {}};
  SaeModel &model = result.model;
  model.reverse_target = config.reverse_target;
  model.encoder.Initialize(init_rng);
  model.decoder.Initialize(init_rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  for (double &v : model.proj_w.value.data()) v = init_rng.Uniform(-bound, bound);

  // Bucket by length: stable sort of indices, then fixed-size chunks.
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return segments[a].dim(0) < segments[b].dim(0);
  });
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < order.size(); i += config.batch) {
    const std::size_t n = std::min(config.batch, order.size() - i);
    batches.push_back(MakeBatch(segments, std::span(order).subspan(i, n), dim,
                                config.reverse_target));
  }

  Adam opt(model.parameters(), config.lr, config.adam);
  std::vector<std::size_t> batch_order(batches.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = batch_order.size(); i > 1; --i) {
      std::swap(batch_order[i - 1], batch_order[order_rng.UniformInt(i)]);
    }
    double sse = 0.0;
    std::size_t count = 0;
    for (std::size_t bi : batch_order) {
      const Batch &b = batches[bi];
      const double denom = static_cast<double>(b.valid * dim);
      opt.ZeroGrad();
      const double batch_sse = RunBatch(model, b, 1.0 / denom, &model);
      if (!std::isfinite(batch_sse)) {
        throw DivergenceError("sae training: non-finite reconstruction loss",
                              epoch);
      }
      try {
        opt.Step();
      } catch (const NonFiniteError &) {
        throw DivergenceError("sae training: non-finite gradient", epoch);
      }
      sse += batch_sse;
      count += b.valid * dim;
    }
    const double mse = sse / static_cast<double>(count);
    result.epoch_mse.push_back(mse);
    if (on_epoch) on_epoch(epoch, mse);
  }
  return result;
}

double SaeReconstructionMse(const SaeModel &model,
                            std::span<const Tensor> segments) {
  if (segments.empty()) throw std::invalid_argument("sae: empty corpus");
  double sse = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::size_t member[1] = {i};
    const Batch b =
        MakeBatch(segments, member, model.input_dim(), model.reverse_target);
    sse += RunBatch(model, b, 0.0, nullptr);
    count += b.valid * model.input_dim();
  }
  return sse / static_cast<double>(count);
}

std::vector<double> Encode(const Tensor &segment, const SaeModel &model) {
  if (segment.rank() != 2 || segment.dim(0) == 0) {
    throw std::invalid_argument("encode: empty segment");
  }
  CheckShape(segment, {segment.dim(0), model.input_dim()}, "encode segment");
  const std::size_t steps = segment.dim(0);
  std::vector<Tensor> xs;
  xs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor x({1, model.input_dim()});
    x.matrix().row(0) = segment.matrix().row(t);
    xs.push_back(std::move(x));
  }
  const std::size_t len[1] = {steps};
  const Tensor zeros({1, model.hidden()});
  const LstmSequenceCache enc =
      LstmForward(model.encoder.View(), xs, len, zeros, zeros);
  const Storage &h = enc.h.back().values();
  return std::vector<double>(h.begin(), h.end());
}

Tensor EncodeAll(std::span<const Tensor> segments, const SaeModel &model) {
  Tensor out({segments.size(), model.hidden()});
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::vector<double> z = Encode(segments[i], model);
    std::copy(z.begin(), z.end(), out.row(i).begin());
  }
  return out;
}

void SaveSae(std::ostream &os, const SaeModel &model) {
  nlohmann::json j;
  j["format"] = "phonegan-sae";
  j["version"] = 1;
  j["input_dim"] = model.input_dim();
  j["hidden"] = model.hidden();
  j["reverse_target"] = model.reverse_target;
  nlohmann::json tensors;
  ToJson(tensors, "encoder.wx", model.encoder.wx.value);
  ToJson(tensors, "encoder.wh", model.encoder.wh.value);
  ToJson(tensors, "encoder.b", model.encoder.b.value);
  ToJson(tensors, "decoder.wx", model.decoder.wx.value);
  ToJson(tensors, "decoder.wh", model.decoder.wh.value);
  ToJson(tensors, "decoder.b", model.decoder.b.value);
  ToJson(tensors, "proj.w", model.proj_w.value);
  ToJson(tensors, "proj.b", model.proj_b.value);
  j["tensors"] = std::move(tensors);
  os << j.dump() << '\n';
}

SaeModel LoadSae(std::istream &is) {
  try {
    const auto j = nlohmann::json::parse(is);
    if (j.at("format").get<std::string>() != "phonegan-sae" ||
        j.at("version").get<int>() != 1) {
      throw std::invalid_argument("sae checkpoint: unknown format or version");
    }
    SaeModel m(j.at("input_dim").get<std::size_t>(),
               j.at("hidden").get<std::size_t>());
    m.reverse_target = j.at("reverse_target").get<bool>();
    const auto &t = j.at("tensors");
    FromJson(t, "encoder.wx", m.encoder.wx.value);
    FromJson(t, "encoder.wh", m.encoder.wh.value);
    FromJson(t, "encoder.b", m.encoder.b.value);
    FromJson(t, "decoder.wx", m.decoder.wx.value);
    FromJson(t, "decoder.wh", m.decoder.wh.value);
    FromJson(t, "decoder.b", m.decoder.b.value);
    FromJson(t, "proj.w", m.proj_w.value);
    FromJson(t, "proj.b", m.proj_b.value);
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("sae checkpoint: ") + e.what());
  }
}

}  // namespace phonegan

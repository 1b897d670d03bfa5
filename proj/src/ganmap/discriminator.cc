// ganmap/discriminator.cc
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

#include "phonegan/ganmap/discriminator.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phonegan/numcore/error.h"
#include "phonegan/numcore/ops.h"

namespace phonegan {

namespace {

// y = leaky(z) * mask, row-wise mask.
void ActivateMasked(const Tensor &z, const Eigen::VectorXd &mask, double slope,
                    Tensor &y) {
  y = Tensor(z.shape());
  const auto za = z.matrix().array();
  y.matrix().array() = za.max(slope * za).colwise() * mask.array();
}

// g *= leaky'(z) * mask, in place.
void GateMasked(const Tensor &z, const Eigen::VectorXd &mask, double slope,
                Tensor &g) {
  const auto za = z.matrix().array();
  auto ga = g.matrix().array();
  ga = (za >= 0.0).select(ga, slope * ga).colwise() * mask.array();
}

void InitUniform(Tensor &t, double bound, Rng &rng) {
  for (double &v : t.data()) v = rng.Uniform(-bound, bound);
}

}  // namespace

Discriminator::Discriminator(std::size_t num_phonemes,
                             DiscriminatorConfig config)
    : num_phonemes_(num_phonemes), config_(std::move(config)) {
  Init(nullptr);
}

Discriminator::Discriminator(std::size_t num_phonemes,
                             DiscriminatorConfig config, Rng &rng)
    : num_phonemes_(num_phonemes), config_(std::move(config)) {
  Init(&rng);
}

void Discriminator::Init(Rng *rng) {
  CheckLeakySlope(config_.leaky_slope);
  if (num_phonemes_ == 0 || config_.branch_widths.empty() ||
      config_.branch_channels == 0 || config_.conv2_channels == 0) {
    throw std::invalid_argument("discriminator: empty layer configuration");
  }
  for (std::size_t w : config_.branch_widths) {
    if (w % 2 == 0) {
      throw std::invalid_argument("discriminator: branch widths must be odd");
    }
  }
  if (config_.conv2_width % 2 == 0) {
    throw std::invalid_argument("discriminator: conv2 width must be odd");
  }
  const std::size_t c1 = config_.branch_channels;
  const std::size_t c1_total = layer1_channels();
  const std::size_t c2 = config_.conv2_channels;
  w1_.clear();
  b1_.clear();
  for (std::size_t w : config_.branch_widths) {
    Parameter weight(Tensor({w, num_phonemes_, c1}));
    Parameter bias(Tensor({c1}));
    if (rng) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(w * num_phonemes_));
      InitUniform(weight.value, bound, *rng);
      InitUniform(bias.value, bound, *rng);
    }
    w1_.push_back(std::move(weight));
    b1_.push_back(std::move(bias));
  }
  w2_ = Parameter(Tensor({config_.conv2_width, c1_total, c2}));
  b2_ = Parameter(Tensor({c2}));
  head_w_ = Parameter(Tensor({c2}));
  head_b_ = Parameter(Tensor({1}));
  if (rng) {
    const double bound2 =
        1.0 / std::sqrt(static_cast<double>(config_.conv2_width * c1_total));
    InitUniform(w2_.value, bound2, *rng);
    InitUniform(b2_.value, bound2, *rng);
    const double bound3 = 1.0 / std::sqrt(static_cast<double>(c2));
    InitUniform(head_w_.value, bound3, *rng);
    InitUniform(head_b_.value, bound3, *rng);
  }
}

std::vector<Parameter *> Discriminator::parameters() {
  std::vector<Parameter *> out;
  for (std::size_t b = 0; b < w1_.size(); ++b) {
    out.push_back(&w1_[b]);
    out.push_back(&b1_[b]);
  }
  out.push_back(&w2_);
  out.push_back(&b2_);
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

void Discriminator::ZeroGrad() {
  for (Parameter *p : parameters()) p->ZeroGrad();
}

void Discriminator::SetZero() {
  for (Parameter *p : parameters()) p->value.SetZero();
}

std::size_t Discriminator::num_parameters() const {
  std::size_t n = w2_.value.size() + b2_.value.size() + head_w_.value.size() +
                  head_b_.value.size();
  for (std::size_t b = 0; b < w1_.size(); ++b) {
    n += w1_[b].value.size() + b1_[b].value.size();
  }
  return n;
}

std::size_t Discriminator::gap() const {
  std::size_t widest = config_.conv2_width;
  for (std::size_t w : config_.branch_widths) widest = std::max(widest, w);
  return widest / 2;
}

double Discriminator::Score(const PhonemeVectorSequence &seq) const {
  DiscriminatorCache cache;
  return Forward(seq, cache);
}

double Discriminator::Forward(const PhonemeVectorSequence &seq,
                              DiscriminatorCache &cache) const {
  return Forward(std::span(&seq, 1), cache).front();
}

std::vector<double> Discriminator::Forward(
    std::span<const PhonemeVectorSequence> batch,
    DiscriminatorCache &cache) const {
  if (batch.empty()) throw std::invalid_argument("discriminator: empty batch");
  const std::size_t L = num_phonemes_;
  const std::size_t spacing = gap();
  cache.segments.clear();
  std::size_t total = 0;
  for (const auto &seq : batch) {
    if (seq.vectors.rank() != 2 || seq.vectors.dim(1) != L) {
      throw ShapeError("discriminator: expected N x " + std::to_string(L) +
                       " input, got " + ShapeToString(seq.vectors.shape()));
    }
    if (seq.mask.size() != seq.vectors.dim(0)) {
      throw ShapeError("discriminator: mask length " +
                       std::to_string(seq.mask.size()) + " vs " +
                       std::to_string(seq.vectors.dim(0)) + " rows");
    }
    std::size_t rows = seq.mask.size();
    while (rows > 0 && seq.mask[rows - 1] == 0) --rows;
    if (rows == 0) {
      throw std::invalid_argument("discriminator: sequence has no valid rows");
    }
    if (!cache.segments.empty()) total += spacing;
    cache.segments.push_back({total, rows, seq.mask.size(), 0.0});
    total += rows;
  }

  cache.mask = Eigen::VectorXd::Zero(static_cast<long>(total));
  cache.x = Tensor({total, L});
  for (std::size_t s = 0; s < batch.size(); ++s) {
    auto &seg = cache.segments[s];
    const auto &seq = batch[s];
    for (std::size_t t = 0; t < seg.rows; ++t) {
      if (!seq.mask[t]) continue;
      cache.mask(static_cast<long>(seg.start + t)) = 1.0;
      seg.count += 1.0;
      auto src = seq.vectors.row(t);
      std::copy(src.begin(), src.end(), cache.x.row(seg.start + t).begin());
    }
  }

  const double slope = config_.leaky_slope;
  const std::size_t c1 = config_.branch_channels;
  cache.z1 = Tensor({total, layer1_channels()});
  auto z1 = cache.z1.matrix();
  for (std::size_t b = 0; b < w1_.size(); ++b) {
    auto block = z1.middleCols(static_cast<long>(b * c1), static_cast<long>(c1));
    Conv1dAccumulate(cache.x.matrix(), w1_[b].value, Padding::kSame, block);
    block.rowwise() += b1_[b].value.vector().transpose();
  }
  ActivateMasked(cache.z1, cache.mask, slope, cache.a1);

  cache.z2 = Tensor({total, config_.conv2_channels});
  Conv1dAccumulate(cache.a1.matrix(), w2_.value, Padding::kSame,
                   cache.z2.matrix());
  cache.z2.matrix().rowwise() += b2_.value.vector().transpose();
  ActivateMasked(cache.z2, cache.mask, slope, cache.a2);

  const auto a2 = cache.a2.matrix();
  cache.pooled.resize(static_cast<long>(batch.size()),
                      static_cast<long>(config_.conv2_channels));
  cache.scores.resize(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto &seg = cache.segments[s];
    cache.pooled.row(static_cast<long>(s)) =
        a2.middleRows(static_cast<long>(seg.start), static_cast<long>(seg.rows))
            .colwise()
            .sum() /
        seg.count;
    cache.scores[s] =
        cache.pooled.row(static_cast<long>(s)).dot(head_w_.value.vector()) +
        head_b_.value[0];
  }
  return cache.scores;
}

void Discriminator::Backward(DiscriminatorCache &cache, double dout,
                             bool param_grads, Tensor *dx) {
  if (cache.segments.size() != 1) {
    throw std::logic_error("discriminator: scalar backward needs a batch of 1");
  }
  std::vector<Tensor> grads;
  Backward(cache, std::span(&dout, 1), param_grads, dx ? &grads : nullptr);
  if (dx) *dx = std::move(grads.front());
}

void Discriminator::Backward(DiscriminatorCache &cache,
                             std::span<const double> dout, bool param_grads,
                             std::vector<Tensor> *dx) {
  if (dout.size() != cache.segments.size()) {
    throw std::invalid_argument("discriminator backward: " +
                                std::to_string(dout.size()) +
                                " upstream values for " +
                                std::to_string(cache.segments.size()) +
                                " sequences");
  }
  const double slope = config_.leaky_slope;
  const std::size_t total = cache.x.dim(0);
  const std::size_t c1 = config_.branch_channels;
  const auto head = head_w_.value.vector().transpose();
  cache.dz2 = Tensor({total, config_.conv2_channels});
  {
    auto dz2 = cache.dz2.matrix();
    for (std::size_t s = 0; s < dout.size(); ++s) {
      const auto &seg = cache.segments[s];
      const Eigen::RowVectorXd g = (dout[s] / seg.count) * head;
      for (std::size_t t = 0; t < seg.rows; ++t) {
        dz2.row(static_cast<long>(seg.start + t)) = g;
      }
      if (param_grads) {
        head_w_.grad.vector() +=
            dout[s] * cache.pooled.row(static_cast<long>(s)).transpose();
        head_b_.grad[0] += dout[s];
      }
    }
  }
  GateMasked(cache.z2, cache.mask, slope, cache.dz2);
  if (param_grads) {
    Conv1dAccumulateWeightGrad(cache.a1.matrix(), cache.dz2.matrix(),
                               Padding::kSame, w2_.grad);
    b2_.grad.vector() += cache.dz2.matrix().colwise().sum().transpose();
  }
  cache.dz1 = Tensor({total, layer1_channels()});
  Conv1dAccumulateInputGrad(cache.dz2.matrix(), w2_.value, Padding::kSame,
                            cache.dz1.matrix());
  GateMasked(cache.z1, cache.mask, slope, cache.dz1);
  auto dz1 = cache.dz1.matrix();
  if (param_grads) {
    for (std::size_t b = 0; b < w1_.size(); ++b) {
      auto block =
          dz1.middleCols(static_cast<long>(b * c1), static_cast<long>(c1));
      Conv1dAccumulateWeightGrad(cache.x.matrix(), block, Padding::kSame,
                                 w1_[b].grad);
      b1_[b].grad.vector() += block.colwise().sum().transpose();
    }
  }
  if (dx) {
    Tensor packed({total, num_phonemes_});
    for (std::size_t b = 0; b < w1_.size(); ++b) {
      auto block =
          dz1.middleCols(static_cast<long>(b * c1), static_cast<long>(c1));
      Conv1dAccumulateInputGrad(block, w1_[b].value, Padding::kSame,
                                packed.matrix());
    }
    dx->clear();
    dx->reserve(cache.segments.size());
    for (const auto &seg : cache.segments) {
      Tensor g({seg.input_rows, num_phonemes_});
      for (std::size_t t = 0; t < seg.rows; ++t) {
        if (cache.mask(static_cast<long>(seg.start + t)) == 0.0) continue;
        auto src = packed.row(seg.start + t);
        std::copy(src.begin(), src.end(), g.row(t).begin());
      }
      dx->push_back(std::move(g));
    }
  }
}

void Discriminator::PenaltyBackward(const DiscriminatorCache &cache,
                                    const Tensor &u) {
  PenaltyBackward(cache, std::span(&u, 1));
}

void Discriminator::PenaltyBackward(const DiscriminatorCache &cache,
                                    std::span<const Tensor> u) {
  const double slope = config_.leaky_slope;
  const std::size_t total = cache.x.dim(0);
  const std::size_t c1 = config_.branch_channels;
  if (u.size() != cache.segments.size()) {
    throw std::invalid_argument("penalty backward: " + std::to_string(u.size()) +
                                " upstream gradients for " +
                                std::to_string(cache.segments.size()) +
                                " sequences");
  }
  if (cache.dz1.empty() || cache.dz2.empty()) {
    throw std::logic_error("penalty backward: call Backward first");
  }
  // The input gradient is masked, so only valid rows of u flow back.
  Tensor um({total, num_phonemes_});
  for (std::size_t s = 0; s < u.size(); ++s) {
    const auto &seg = cache.segments[s];
    if (u[s].rank() != 2 || u[s].dim(1) != num_phonemes_ ||
        u[s].dim(0) < seg.rows) {
      throw ShapeError("penalty backward: upstream gradient " +
                       ShapeToString(u[s].shape()) + " does not cover " +
                       std::to_string(seg.rows) + " rows");
    }
    for (std::size_t t = 0; t < seg.rows; ++t) {
      if (cache.mask(static_cast<long>(seg.start + t)) == 0.0) continue;
      auto src = u[s].row(t);
      std::copy(src.begin(), src.end(), um.row(seg.start + t).begin());
    }
  }
  // g = sum_b convT(dz1_b, W1_b): adjoint is a forward conv of um for dz1
  // and a weight-gradient contraction for W1.
  Tensor bar_dz1({total, layer1_channels()});
  auto bdz1 = bar_dz1.matrix();
  auto dz1 = cache.dz1.matrix();
  for (std::size_t b = 0; b < w1_.size(); ++b) {
    const long off = static_cast<long>(b * c1);
    const long width = static_cast<long>(c1);
    Conv1dAccumulate(um.matrix(), w1_[b].value, Padding::kSame,
                     bdz1.middleCols(off, width));
    Conv1dAccumulateWeightGrad(um.matrix(), dz1.middleCols(off, width),
                               Padding::kSame, w1_[b].grad);
  }
  // dz1 = convT(dz2, W2) * s1.
  GateMasked(cache.z1, cache.mask, slope, bar_dz1);
  Tensor bar_dz2({total, config_.conv2_channels});
  Conv1dAccumulate(bar_dz1.matrix(), w2_.value, Padding::kSame,
                   bar_dz2.matrix());
  Conv1dAccumulateWeightGrad(bar_dz1.matrix(), cache.dz2.matrix(),
                             Padding::kSame, w2_.grad);
  // dz2 = s2 * (head_w / count) per row, so head_w collects the per-segment
  // means of the gated adjoint.
  GateMasked(cache.z2, cache.mask, slope, bar_dz2);
  const auto bdz2 = bar_dz2.matrix();
  for (const auto &seg : cache.segments) {
    head_w_.grad.vector() +=
        bdz2.middleRows(static_cast<long>(seg.start), static_cast<long>(seg.rows))
            .colwise()
            .sum()
            .transpose() /
        seg.count;
  }
}

}  // namespace phonegan

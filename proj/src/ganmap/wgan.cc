// ganmap/wgan.cc
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

#include "phonegan/ganmap/wgan.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "phonegan/numcore/error.h"

namespace phonegan {

double MeanScore(const Discriminator &d,
                 std::span<const PhonemeVectorSequence> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (const auto &seq : batch) total += d.Score(seq);
  return total / static_cast<double>(batch.size());
}

PhonemeVectorSequence Interpolate(const PhonemeVectorSequence &real,
                                  const PhonemeVectorSequence &fake,
                                  double eps) {
  if (real.num_phonemes() != fake.num_phonemes()) {
    throw ShapeError("interpolate: phoneme dims differ");
  }
  const std::size_t n = std::max(real.length(), fake.length());
  const std::size_t L = real.num_phonemes();
  PhonemeVectorSequence out{Tensor({n, L}), std::vector<std::uint8_t>(n, 0)};
  for (std::size_t t = 0; t < n; ++t) {
    auto dst = out.vectors.row(t);
    const bool has_r = t < real.length() && real.mask[t];
    const bool has_f = t < fake.length() && fake.mask[t];
    if (has_r) {
      auto r = real.vectors.row(t);
      for (std::size_t j = 0; j < L; ++j) dst[j] += eps * r[j];
    }
    if (has_f) {
      auto f = fake.vectors.row(t);
      for (std::size_t j = 0; j < L; ++j) dst[j] += (1.0 - eps) * f[j];
    }
    out.mask[t] = (has_r || has_f) ? 1 : 0;
  }
  return out;
}

PenaltyResult GradientPenalty(Discriminator &d,
                              std::span<const PhonemeVectorSequence> real,
                              std::span<const PhonemeVectorSequence> fake,
                              Rng &rng, double param_grad_scale) {
  if (real.size() != fake.size() || real.empty()) {
    throw std::invalid_argument("gradient penalty: batches must be non-empty "
                                "and equal-sized, got " +
                                std::to_string(real.size()) + " and " +
                                std::to_string(fake.size()));
  }
  const std::size_t n = real.size();
  const double inv_b = 1.0 / static_cast<double>(n);
  PhonemeVectorBatch mixed;
  mixed.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = rng.Uniform();
    mixed.push_back(Interpolate(real[i], fake[i], eps));
  }
  DiscriminatorCache cache;
  d.Forward(mixed, cache);
  const std::vector<double> ones(n, 1.0);
  std::vector<Tensor> grads;
  d.Backward(cache, ones, false, &grads);

  PenaltyResult result;
  bool any = false;
  for (auto &g : grads) {
    if (!g.AllFinite()) {
      throw NonFiniteError("gradient penalty: non-finite critic gradient");
    }
    const double norm = g.vector().norm();
    result.grad_norms.push_back(norm);
    result.penalty += inv_b * (norm - 1.0) * (norm - 1.0);
    // d/dg (|g| - 1)^2 = 2 (|g| - 1) g / |g|.
    if (norm > 0.0) {
      g *= param_grad_scale * inv_b * 2.0 * (norm - 1.0) / norm;
      any = true;
    } else {
      g.SetZero();
    }
  }
  if (param_grad_scale != 0.0 && any) d.PenaltyBackward(cache, grads);
  return result;
}

CriticLoss DLoss(Discriminator &d, std::span<const PhonemeVectorSequence> real,
                 std::span<const PhonemeVectorSequence> fake, double lambda,
                 Rng &rng, bool accumulate) {
  if (real.empty() || fake.empty()) {
    throw std::invalid_argument("d_loss: empty batch");
  }
  CriticLoss out;
  DiscriminatorCache cache;
  const std::vector<double> rs = d.Forward(real, cache);
  for (double v : rs) out.real_mean += v;
  out.real_mean /= static_cast<double>(real.size());
  if (accumulate) {
    d.Backward(cache,
               std::vector<double>(real.size(),
                                   -1.0 / static_cast<double>(real.size())),
               true, nullptr);
  }
  const std::vector<double> fs = d.Forward(fake, cache);
  for (double v : fs) out.fake_mean += v;
  out.fake_mean /= static_cast<double>(fake.size());
  if (accumulate) {
    d.Backward(cache,
               std::vector<double>(fake.size(),
                                   1.0 / static_cast<double>(fake.size())),
               true, nullptr);
  }
  out.penalty =
      GradientPenalty(d, real, fake, rng, accumulate ? lambda : 0.0).penalty;
  out.loss = -(out.real_mean - out.fake_mean) + lambda * out.penalty;
  return out;
}

GeneratorLoss GLoss(Discriminator &d,
                    std::span<const PhonemeVectorSequence> fake,
                    bool input_grads) {
  if (fake.empty()) throw std::invalid_argument("g_loss: empty batch");
  GeneratorLoss out;
  DiscriminatorCache cache;
  const double inv_b = 1.0 / static_cast<double>(fake.size());
  for (double v : d.Forward(fake, cache)) out.loss -= inv_b * v;
  if (input_grads) {
    d.Backward(cache, std::vector<double>(fake.size(), -inv_b), false,
               &out.dfake);
  }
  return out;
}

}  // namespace phonegan

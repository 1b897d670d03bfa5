// phonegan/ganmap/wgan.h
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

// Wasserstein critic and generator objectives with gradient penalty.

#ifndef PHONEGAN_GANMAP_WGAN_H_
#define PHONEGAN_GANMAP_WGAN_H_

#include <span>
#include <vector>

#include "phonegan/ganmap/discriminator.h"
#include "phonegan/ganmap/generator.h"

namespace phonegan {

using PhonemeVectorBatch = std::vector<PhonemeVectorSequence>;

double MeanScore(const Discriminator &d, std::span<const PhonemeVectorSequence> batch);

// x = eps * real + (1 - eps) * fake with a single eps for the whole
// sequence. Rows missing from the shorter input count as zeros; the mask
// is the union of both masks.
PhonemeVectorSequence Interpolate(const PhonemeVectorSequence &real,
                                  const PhonemeVectorSequence &fake,
                                  double eps);

struct PenaltyResult {
  double penalty = 0.0;             // mean over batch of (|grad| - 1)^2
  std::vector<double> grad_norms;   // |dD/dx| at each interpolate
};

// When `param_grad_scale` is non-zero, scale * dPenalty/dtheta is
// accumulated into the critic's parameter gradients.
PenaltyResult GradientPenalty(Discriminator &d,
                              std::span<const PhonemeVectorSequence> real,
                              std::span<const PhonemeVectorSequence> fake,
                              Rng &rng, double param_grad_scale = 0.0);

struct CriticLoss {
  double loss = 0.0;
  double real_mean = 0.0;
  double fake_mean = 0.0;
  double penalty = 0.0;
};

// -(mean D(real) - mean D(fake)) + lambda * penalty. The fake batch is a
// constant input; with `accumulate` the critic's gradients are filled.
CriticLoss DLoss(Discriminator &d, std::span<const PhonemeVectorSequence> real,
                 std::span<const PhonemeVectorSequence> fake, double lambda,
                 Rng &rng, bool accumulate);

struct GeneratorLoss {
  double loss = 0.0;
  std::vector<Tensor> dfake;  // dLoss/d(fake rows), only when requested
};

// -mean D(fake). The critic's parameter gradients are left untouched.
GeneratorLoss GLoss(Discriminator &d,
                    std::span<const PhonemeVectorSequence> fake,
                    bool input_grads);

}  // namespace phonegan

#endif  // PHONEGAN_GANMAP_WGAN_H_

// numcore/gradcheck.cc
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

#include "phonegan/numcore/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace phonegan {

GradCheckResult GradCheck(const DifferentiableFn &f, const Tensor &x,
                          double h) {
  if (!(h > 0.0)) throw std::invalid_argument("grad check: h must be > 0");
  Tensor analytic = Tensor::ZerosLike(x);
  f(x, &analytic);
  CheckShape(analytic, x.shape(), "grad check analytic gradient");

  GradCheckResult result;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = f(probe, nullptr);
    probe[i] = orig - h;
    const double down = f(probe, nullptr);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[i];
    const double denom =
        std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
    const double err = std::abs(a - numeric) / denom;
    if (i == 0 || err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
      result.analytic = a;
      result.numeric = numeric;
    }
  }
  return result;
}

}  // namespace phonegan

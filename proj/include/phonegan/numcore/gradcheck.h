// phonegan/numcore/gradcheck.h
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

#ifndef PHONEGAN_NUMCORE_GRADCHECK_H_
#define PHONEGAN_NUMCORE_GRADCHECK_H_

#include <cstddef>
#include <functional>

#include "phonegan/numcore/tensor.h"

namespace phonegan {

// Scalar function of a tensor. When `grad` is non-null it must be filled
// with the analytic gradient (same shape as x).
using DifferentiableFn = std::function<double(const Tensor &x, Tensor *grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;  // at worst_index
  double numeric = 0.0;
};

// Magnitudes below this are compared on an absolute scale.
inline constexpr double kGradCheckFloor = 1e-6;

// Central differences (f(x+h) - f(x-h)) / 2h per component, compared with
// the analytic gradient as |a - n| / max(|a|, |n|, kGradCheckFloor).
GradCheckResult GradCheck(const DifferentiableFn &f, const Tensor &x,
                          double h = 1e-5);

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_GRADCHECK_H_

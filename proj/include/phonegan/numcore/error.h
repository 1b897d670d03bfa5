// phonegan/numcore/error.h
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

#ifndef PHONEGAN_NUMCORE_ERROR_H_
#define PHONEGAN_NUMCORE_ERROR_H_

#include <stdexcept>
#include <string>

namespace phonegan {

// Mismatched tensor shapes or dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf where finite values are required.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A training loop produced a non-finite loss. `step` is the epoch or
// iteration index at which it happened.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string &what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_ERROR_H_

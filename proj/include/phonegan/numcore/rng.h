// phonegan/numcore/rng.h
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

#ifndef PHONEGAN_NUMCORE_RNG_H_
#define PHONEGAN_NUMCORE_RNG_H_

#include <cstdint>
#include <string_view>

namespace phonegan {

// SplitMix64 finalizer.
std::uint64_t Mix64(std::uint64_t x);

// FNV-1a over the bytes of `s`; used to name RNG streams.
std::uint64_t HashName(std::string_view s);

// Counter-based generator: draw n is Mix64(seed + n * golden gamma).
// All distributions are computed here from raw 64-bit draws, so a seed
// gives the same sequence on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double Uniform();
  // Uniform in (0, 1).
  double UniformOpen();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);
  // Standard normal via Box-Muller (both variates are used).
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  // Gamma(shape, 1) by Marsaglia-Tsang.
  double Gamma(double shape);

  // Independent generator for a named sub-stream.
  Rng Derive(std::string_view name) const;
  Rng Derive(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_RNG_H_

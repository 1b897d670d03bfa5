// eval/metrics.cc
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


#include "phonegan/eval/metrics.h"

#include <algorithm>
#include <stdexcept>

#include "phonegan/numcore/error.h"
#include "phonegan/numcore/rng.h"

namespace phonegan {

namespace {

void CheckIds(std::span<const int> ids, std::size_t num_phonemes,
              const char *what) {
  for (int v : ids) {
    if (v < 0 || static_cast<std::size_t>(v) >= num_phonemes) {
      throw std::invalid_argument(std::string(what) + ": phoneme id " +
                                  std::to_string(v) + " outside [0, " +
                                  std::to_string(num_phonemes) + ")");
    }
  }
}

}  // namespace

double PhonemeAccuracy(std::span<const int> pred, std::span<const int> ref) {
  if (pred.size() != ref.size()) {
    throw std::invalid_argument("phoneme_accuracy: " +
                                std::to_string(pred.size()) +
                                " predictions for " +
                                std::to_string(ref.size()) + " references");
  }
  if (ref.empty()) throw std::invalid_argument("phoneme_accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) hits += pred[i] == ref[i];
  return static_cast<double>(hits) / static_cast<double>(ref.size());
}

std::uint64_t EvalReport::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < num_phonemes; ++i) {
    t += confusion[i * num_phonemes + i];
  }
  return t;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json j;
  j["accuracy"] = accuracy;
  j["n_segments"] = n_segments;
  j["num_phonemes"] = num_phonemes;
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < num_phonemes; ++r) {
    rows.push_back(std::vector<std::uint64_t>(
        confusion.begin() + static_cast<long>(r * num_phonemes),
        confusion.begin() + static_cast<long>((r + 1) * num_phonemes)));
  }
  j["confusion"] = std::move(rows);
  return j;
}

EvalReport Evaluate(std::span<const int> pred, std::span<const int> ref,
                    std::size_t num_phonemes) {
  EvalReport r;
  r.accuracy = PhonemeAccuracy(pred, ref);
  CheckIds(pred, num_phonemes, "evaluate predictions");
  CheckIds(ref, num_phonemes, "evaluate references");
  r.num_phonemes = num_phonemes;
  r.n_segments = ref.size();
  r.confusion.assign(num_phonemes * num_phonemes, 0);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(ref[i]) * num_phonemes +
                  static_cast<std::size_t>(pred[i])];
  }
  return r;
}

double RandomBaselineExpected(std::size_t num_phonemes) {
  if (num_phonemes < 1) throw std::invalid_argument("random baseline: L < 1");
  return 1.0 / static_cast<double>(num_phonemes);
}

EvalReport BaselineRandom(std::span<const int> ref, std::size_t num_phonemes,
                          std::uint64_t seed) {
  RandomBaselineExpected(num_phonemes);
  Rng rng = Rng(seed).Derive("random-baseline");
  std::vector<int> pred(ref.size());
  for (int &p : pred) p = static_cast<int>(rng.UniformInt(num_phonemes));
  return Evaluate(pred, ref, num_phonemes);
}

EvalReport BaselineMostFrequent(std::span<const int> ref,
                                std::size_t num_phonemes) {
  if (ref.empty()) throw std::invalid_argument("most-frequent baseline: empty");
  CheckIds(ref, num_phonemes, "most-frequent baseline");
  std::vector<std::size_t> counts(num_phonemes, 0);
  for (int v : ref) ++counts[static_cast<std::size_t>(v)];
  const int mode = static_cast<int>(
      std::max_element(counts.begin(), counts.end()) - counts.begin());
  const std::vector<int> pred(ref.size(), mode);
  return Evaluate(pred, ref, num_phonemes);
}

std::vector<int> EnsembleVote(std::span<const std::vector<int>> predictions,
                              std::span<const Tensor> probabilities) {
  if (predictions.empty()) throw std::invalid_argument("ensemble: no models");
  const std::size_t n = predictions.front().size();
  for (const auto &p : predictions) {
    if (p.size() != n) {
      throw std::invalid_argument("ensemble: prediction lengths differ (" +
                                  std::to_string(p.size()) + " vs " +
                                  std::to_string(n) + ")");
    }
  }
  if (!probabilities.empty() && probabilities.size() != predictions.size()) {
    throw std::invalid_argument("ensemble: probabilities given for " +
                                std::to_string(probabilities.size()) +
                                " of " + std::to_string(predictions.size()) +
                                " models");
  }
  int max_id = 0;
  for (const auto &p : predictions) {
    for (int v : p) {
      if (v < 0) throw std::invalid_argument("ensemble: negative phoneme id");
      max_id = std::max(max_id, v);
    }
  }
  const std::size_t width = static_cast<std::size_t>(max_id) + 1;
  for (const auto &t : probabilities) {
    if (t.rank() != 2 || t.dim(0) != n || t.dim(1) < width) {
      throw ShapeError("ensemble: probability matrix " +
                       ShapeToString(t.shape()) + " does not cover " +
                       std::to_string(n) + " positions and id " +
                       std::to_string(max_id));
    }
  }

  std::vector<int> out(n);
  std::vector<std::size_t> votes(width);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    for (const auto &p : predictions) ++votes[static_cast<std::size_t>(p[i])];
    const std::size_t top = *std::max_element(votes.begin(), votes.end());
    int best = -1;
    double best_mass = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      if (votes[c] != top) continue;
      double mass = 0.0;
      for (const auto &t : probabilities) mass += t.at(i, c);
      if (best < 0 || mass > best_mass) {
        best = static_cast<int>(c);
        best_mass = mass;
      }
    }
    out[i] = best;
  }
  return out;
}

}  // namespace phonegan

// synth/world.cc
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

#include "phonegan/synth/world.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace phonegan {

namespace {

std::size_t SampleCategorical(std::span<const double> probs, Rng &rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace

std::vector<std::string> World::PhonemeNames() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < config.num_phonemes; ++i) {
    names.push_back("p" + std::to_string(i));
  }
  return names;
}

World GenWorld(const WorldConfig &config) {
  if (config.num_phonemes < 2) {
    throw std::invalid_argument("world: need at least 2 phonemes");
  }
  if (config.modes_per_phoneme < 1) {
    throw std::invalid_argument("world: need at least 1 mode per phoneme");
  }
  if (config.dim < 1) throw std::invalid_argument("world: dim must be >= 1");
  if (config.sigma < 0.0) throw std::invalid_argument("world: sigma < 0");

  World world;
  world.config = config;
  Rng root(config.seed);
  Rng proto_rng = root.Derive("prototypes");
  const std::size_t count = config.num_phonemes * config.modes_per_phoneme;
  world.prototypes = Tensor({count, config.dim});
  const double gap2 = config.min_proto_gap * config.min_proto_gap;
  int rejections = 0;
  for (std::size_t p = 0; p < count;) {
    auto row = world.prototypes.row(p);
    for (double &v : row) v = proto_rng.Uniform(-config.proto_range,
                                                config.proto_range);
    bool ok = true;
    for (std::size_t q = 0; q < p && ok; ++q) {
      double d2 = 0.0;
      auto other = world.prototypes.row(q);
      for (std::size_t j = 0; j < config.dim; ++j) {
        d2 += (row[j] - other[j]) * (row[j] - other[j]);
      }
      ok = d2 >= gap2 && d2 > 0.0;
    }
    if (ok) {
      ++p;
    } else if (++rejections > config.max_rejections) {
      throw std::invalid_argument(
          "world: could not place " + std::to_string(count) +
          " prototypes with gap " + std::to_string(config.min_proto_gap) +
          " in [-" + std::to_string(config.proto_range) + ", " +
          std::to_string(config.proto_range) + "]^" +
          std::to_string(config.dim));
    }
  }

  Rng lm_rng = root.Derive("bigram");
  const std::size_t L = config.num_phonemes;
  world.bigram = Tensor({L, L});
  if (config.bigram_permutations > 0) {
    std::vector<double> weights(config.bigram_permutations);
    double total = 0.0;
    for (double &w : weights) {
      w = lm_rng.Gamma(config.bigram_concentration);
      total += w;
    }
    std::vector<std::size_t> perm(L);
    for (double w : weights) {
      for (std::size_t i = 0; i < L; ++i) perm[i] = i;
      for (std::size_t i = L - 1; i > 0; --i) {
        std::swap(perm[i], perm[lm_rng.UniformInt(i + 1)]);
      }
      for (std::size_t a = 0; a < L; ++a) {
        world.bigram.at(a, perm[a]) += (1.0 - config.bigram_floor) * w / total;
      }
    }
    for (double &v : world.bigram.data()) {
      v += config.bigram_floor / static_cast<double>(L);
    }
  } else {
    for (std::size_t a = 0; a < L; ++a) {
      auto row = world.bigram.row(a);
      double total = 0.0;
      for (double &v : row) {
        v = lm_rng.Gamma(config.bigram_concentration);
        total += v;
      }
      for (double &v : row) {
        v = (1.0 - config.bigram_floor) * v / total +
            config.bigram_floor / static_cast<double>(L);
      }
    }
  }
  world.initial.assign(L, 1.0 / static_cast<double>(L));
  return world;
}

std::vector<int> SamplePhonemeString(const World &world, std::size_t length,
                                     Rng &rng) {
  std::vector<int> out;
  out.reserve(length);
  if (length == 0) return out;
  out.push_back(static_cast<int>(SampleCategorical(world.initial, rng)));
  while (out.size() < length) {
    out.push_back(static_cast<int>(
        SampleCategorical(world.bigram.row(out.back()), rng)));
  }
  return out;
}

SynthCorpus GenCorpus(const World &world, const CorpusConfig &config) {
  if (config.num_utterances < 1) {
    throw std::invalid_argument("corpus: need at least one utterance");
  }
  if (config.min_length < 1 || config.max_length < config.min_length) {
    throw std::invalid_argument("corpus: invalid length range");
  }
  const FrameConfig &fc = config.frames;
  if (fc.enabled && (fc.min_frames < 1 || fc.max_frames < fc.min_frames)) {
    throw std::invalid_argument("corpus: invalid frame range");
  }
  Rng root(config.seed);
  Rng len_rng = root.Derive("lengths");
  Rng text_rng = root.Derive("text");
  Rng mode_rng = root.Derive("modes");
  Rng noise_rng = root.Derive("noise");
  Rng unrelated_rng = root.Derive("unrelated");

  const std::size_t span_len = config.max_length - config.min_length + 1;
  const std::size_t dim = world.dim();
  const double sigma = world.config.sigma;
  SynthCorpus corpus;
  for (std::size_t u = 0; u < config.num_utterances; ++u) {
    SynthUtterance utt;
    utt.id = "utt" + std::to_string(u);
    const std::size_t length = config.min_length + len_rng.UniformInt(span_len);
    utt.labels = SamplePhonemeString(world, length, text_rng);
    utt.embeddings = Tensor({length, dim});
    std::vector<std::size_t> seg_frames;
    for (std::size_t i = 0; i < length; ++i) {
      const int mode = static_cast<int>(mode_rng.UniformInt(world.modes()));
      utt.modes.push_back(mode);
      const auto proto = world.prototypes.row(
          static_cast<std::size_t>(utt.labels[i]) * world.modes() + mode);
      auto emb = utt.embeddings.row(i);
      for (std::size_t j = 0; j < dim; ++j) {
        emb[j] = proto[j] + sigma * noise_rng.Normal();
      }
      if (fc.enabled) {
        seg_frames.push_back(fc.min_frames +
                             len_rng.UniformInt(fc.max_frames -
                                                fc.min_frames + 1));
      }
    }
    if (fc.enabled) {
      std::size_t total = 2 * fc.silence_frames;
      for (std::size_t f : seg_frames) total += f;
      utt.frames = Tensor({total, dim});
      std::size_t t = 0;
      auto silence = [&](std::size_t n) {
        for (std::size_t s = 0; s < n; ++s, ++t) {
          for (double &v : utt.frames.row(t)) v = sigma * noise_rng.Normal();
        }
      };
      silence(fc.silence_frames);
      for (std::size_t i = 0; i < length; ++i) {
        utt.boundaries.push_back(static_cast<int>(t));
        const auto proto = world.prototypes.row(
            static_cast<std::size_t>(utt.labels[i]) * world.modes() +
            static_cast<std::size_t>(utt.modes[i]));
        for (std::size_t f = 0; f < seg_frames[i]; ++f, ++t) {
          auto row = utt.frames.row(t);
          for (std::size_t j = 0; j < dim; ++j) {
            row[j] = proto[j] + sigma * noise_rng.Normal();
          }
        }
      }
      utt.boundaries.push_back(static_cast<int>(t));
      silence(fc.silence_frames);
    }
    corpus.matched_text.push_back(utt.labels);
    corpus.utterances.push_back(std::move(utt));
  }
  const std::size_t n_text = config.num_unrelated_sentences == 0
                                 ? config.num_utterances
                                 : config.num_unrelated_sentences;
  for (std::size_t s = 0; s < n_text; ++s) {
    const std::size_t length =
        config.min_length + unrelated_rng.UniformInt(span_len);
    corpus.unrelated_text.push_back(
        SamplePhonemeString(world, length, unrelated_rng));
  }
  return corpus;
}

OracleMap OracleBestMap(std::span<const int> indices,
                        std::span<const int> labels) {
  if (indices.size() != labels.size()) {
    throw std::invalid_argument("oracle map: indices and labels differ in "
                                "length");
  }
  OracleMap out;
  if (indices.empty()) return out;
  std::vector<std::pair<int, int>> pairs(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    pairs[i] = {indices[i], labels[i]};
  }
  std::sort(pairs.begin(), pairs.end());
  // Runs of equal (cluster, label); keep the longest run per cluster.
  std::size_t i = 0;
  while (i < pairs.size()) {
    const int cluster = pairs[i].first;
    int best_label = pairs[i].second;
    std::size_t best_run = 0;
    while (i < pairs.size() && pairs[i].first == cluster) {
      std::size_t j = i;
      while (j < pairs.size() && pairs[j] == pairs[i]) ++j;
      if (j - i > best_run) {
        best_run = j - i;
        best_label = pairs[i].second;
      }
      i = j;
    }
    out.cluster_to_label.emplace_back(cluster, best_label);
  }
  std::size_t correct = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto it = std::lower_bound(
        out.cluster_to_label.begin(), out.cluster_to_label.end(),
        std::make_pair(indices[k], std::numeric_limits<int>::min()));
    if (it->second == labels[k]) ++correct;
  }
  out.accuracy =
      static_cast<double>(correct) / static_cast<double>(indices.size());
  return out;
}

StackedCorpus Stack(const SynthCorpus &corpus) {
  StackedCorpus out;
  std::size_t total = 0;
  for (const auto &u : corpus.utterances) total += u.labels.size();
  const std::size_t dim =
      corpus.utterances.empty() ? 0 : corpus.utterances[0].embeddings.dim(1);
  out.embeddings = Tensor({total, dim});
  out.offsets.push_back(0);
  std::size_t row = 0;
  for (const auto &u : corpus.utterances) {
    for (std::size_t i = 0; i < u.labels.size(); ++i, ++row) {
      std::copy_n(u.embeddings.row(i).begin(), dim,
                  out.embeddings.row(row).begin());
      out.labels.push_back(u.labels[i]);
    }
    out.offsets.push_back(row);
  }
  return out;
}

}  // namespace phonegan

// tests/unit/synth_test.cc
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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "phonegan/cluster/kmeans.h"
#include "phonegan/synth/world.h"

using namespace phonegan;

namespace {

double Distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Majority-label accuracy computed by counting, independent of OracleBestMap.
double CountedPurity(std::span<const int> idx, std::span<const int> labels) {
  std::map<int, std::map<int, int>> counts;
  for (std::size_t i = 0; i < idx.size(); ++i) counts[idx[i]][labels[i]]++;
  int hit = 0;
  for (const auto &[k, c] : counts) {
    int best = 0;
    for (const auto &[l, n] : c) best = std::max(best, n);
    hit += best;
  }
  return static_cast<double>(hit) / static_cast<double>(idx.size());
}

}  // namespace

TEST(World, SameSeedSameWorld) {
  WorldConfig c;
  c.seed = 5;
  const World a = GenWorld(c), b = GenWorld(c);
  EXPECT_EQ(a.prototypes.values(), b.prototypes.values());
  EXPECT_EQ(a.bigram.values(), b.bigram.values());
  EXPECT_EQ(a.initial, b.initial);
  c.seed = 6;
  EXPECT_NE(GenWorld(c).prototypes.values(), a.prototypes.values());
}

TEST(World, BigramRowsAreDistributionsWithFloor) {
  WorldConfig c;
  c.num_phonemes = 6;
  const World w = GenWorld(c);
  for (std::size_t i = 0; i < 6; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_GE(w.bigram.at(i, j), c.bigram_floor / 6.0 - 1e-15);
      s += w.bigram.at(i, j);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
  double s = 0.0;
  for (double p : w.initial) s += p;
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(World, PermutationBigramIsDoublyStochastic) {
  WorldConfig c;
  c.num_phonemes = 7;
  c.bigram_permutations = 3;
  const World w = GenWorld(c);
  for (std::size_t j = 0; j < 7; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < 7; ++i) col += w.bigram.at(i, j);
    EXPECT_NEAR(col, 1.0, 1e-12);
  }
}

TEST(World, PrototypesRespectGapAndRange) {
  WorldConfig c;
  c.num_phonemes = 8;
  c.modes_per_phoneme = 2;
  c.dim = 4;
  const World w = GenWorld(c);
  ASSERT_EQ(w.prototypes.dim(0), 16u);
  for (std::size_t a = 0; a < 16; ++a) {
    for (double v : w.prototypes.row(a)) EXPECT_LE(std::abs(v), c.proto_range);
    for (std::size_t b = a + 1; b < 16; ++b) {
      EXPECT_GE(Distance(w.prototypes.row(a), w.prototypes.row(b)), c.min_proto_gap);
    }
  }
  const std::vector<std::string> names = w.PhonemeNames();
  EXPECT_EQ(names.size(), 8u);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 8u);
}

TEST(World, RejectsImpossibleConfigs) {
  WorldConfig c;
  c.num_phonemes = 1;
  EXPECT_THROW(GenWorld(c), std::invalid_argument);
  c = WorldConfig{};
  c.sigma = -1.0;
  EXPECT_THROW(GenWorld(c), std::invalid_argument);
  c = WorldConfig{};
  c.dim = 1;
  c.num_phonemes = 40;
  c.min_proto_gap = 1.0;
  c.max_rejections = 100;
  EXPECT_THROW(GenWorld(c), std::invalid_argument);
}

TEST(Corpus, NoiselessEmbeddingsSitOnPrototypes) {
  WorldConfig wc;
  wc.modes_per_phoneme = 2;
  const World w = GenWorld(wc);
  CorpusConfig cc;
  cc.num_utterances = 20;
  const SynthCorpus corpus = GenCorpus(w, cc);
  for (const auto &u : corpus.utterances) {
    ASSERT_EQ(u.labels.size(), u.embeddings.dim(0));
    ASSERT_EQ(u.modes.size(), u.labels.size());
    EXPECT_GE(u.labels.size(), cc.min_length);
    EXPECT_LE(u.labels.size(), cc.max_length);
    for (std::size_t i = 0; i < u.labels.size(); ++i) {
      const std::size_t row = static_cast<std::size_t>(u.labels[i]) * 2 +
                              static_cast<std::size_t>(u.modes[i]);
      EXPECT_EQ(Distance(u.embeddings.row(i), w.prototypes.row(row)), 0.0);
    }
  }
  for (std::size_t u = 0; u < corpus.utterances.size(); ++u) {
    EXPECT_EQ(corpus.matched_text[u], corpus.utterances[u].labels);
  }
}

TEST(Corpus, NoiselessWorldIsPerfectlyClusterable) {
  WorldConfig wc;
  wc.modes_per_phoneme = 2;
  wc.seed = 3;
  const World w = GenWorld(wc);
  const StackedCorpus st = Stack(GenCorpus(w, CorpusConfig{}));
  // Each point assigned to its generating prototype: two clusters per
  // phoneme, every cluster single-label.
  Codebook truth{w.prototypes};
  const std::vector<int> idx = Assign(st.embeddings, truth);
  EXPECT_EQ(Purity(idx, st.labels), 1.0);
  std::map<int, std::set<int>> clusters_of;
  for (std::size_t i = 0; i < idx.size(); ++i) clusters_of[st.labels[i]].insert(idx[i]);
  for (const auto &[p, ks] : clusters_of) EXPECT_EQ(ks.size(), 2u);
}

TEST(Corpus, BigramFrequenciesMatchWorld) {
  WorldConfig wc;
  wc.num_phonemes = 5;
  wc.seed = 11;
  const World w = GenWorld(wc);
  Rng rng(2);
  const std::vector<int> s = SamplePhonemeString(w, 100000, rng);
  std::vector<double> counts(25, 0.0), from(5, 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    counts[static_cast<std::size_t>(s[i - 1] * 5 + s[i])] += 1;
    from[static_cast<std::size_t>(s[i - 1])] += 1;
  }
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_NEAR(counts[i * 5 + j] / from[i], w.bigram.at(i, j), 0.02);
    }
}

TEST(Corpus, FramesAndSilence) {
  const World w = GenWorld(WorldConfig{});
  CorpusConfig cc;
  cc.num_utterances = 5;
  cc.frames = FrameConfig{true, 2, 4, 3};
  const SynthCorpus corpus = GenCorpus(w, cc);
  for (const auto &u : corpus.utterances) {
    ASSERT_EQ(u.boundaries.size(), u.labels.size() + 1);
    EXPECT_EQ(u.boundaries.front(), 3);
    EXPECT_EQ(static_cast<std::size_t>(u.boundaries.back()) + 3, u.frames.dim(0));
    for (std::size_t i = 0; i + 1 < u.boundaries.size(); ++i) {
      const int len = u.boundaries[i + 1] - u.boundaries[i];
      EXPECT_GE(len, 2);
      EXPECT_LE(len, 4);
    }
  }
}

TEST(Corpus, UnrelatedTextIsIndependentDraw) {
  const World w = GenWorld(WorldConfig{});
  CorpusConfig cc;
  cc.num_utterances = 30;
  cc.num_unrelated_sentences = 40;
  const SynthCorpus c = GenCorpus(w, cc);
  EXPECT_EQ(c.unrelated_text.size(), 40u);
  std::size_t same = 0;
  for (std::size_t u = 0; u < 30; ++u) same += c.unrelated_text[u] == c.matched_text[u];
  EXPECT_EQ(same, 0u);
}

TEST(Corpus, StackOffsets) {
  const SynthCorpus c = GenCorpus(GenWorld(WorldConfig{}), CorpusConfig{7, 2, 5, 0, {}, 1});
  const StackedCorpus st = Stack(c);
  ASSERT_EQ(st.offsets.size(), 8u);
  EXPECT_EQ(st.offsets.back(), st.embeddings.dim(0));
  EXPECT_EQ(st.labels.size(), st.embeddings.dim(0));
  for (std::size_t u = 0; u < 7; ++u) {
    EXPECT_EQ(st.offsets[u + 1] - st.offsets[u], c.utterances[u].labels.size());
  }
}

TEST(Corpus, RejectsBadRanges) {
  const World w = GenWorld(WorldConfig{});
  CorpusConfig cc;
  cc.min_length = 5;
  cc.max_length = 4;
  EXPECT_THROW(GenCorpus(w, cc), std::invalid_argument);
  cc = CorpusConfig{};
  cc.num_utterances = 0;
  EXPECT_THROW(GenCorpus(w, cc), std::invalid_argument);
}

TEST(OracleBestMap, MatchesPurityOnRandomInstances) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.UniformInt(200);
    const std::size_t k = 1 + rng.UniformInt(12), l = 1 + rng.UniformInt(6);
    std::vector<int> idx(n), lab(n);
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = 1 + static_cast<int>(rng.UniformInt(k));
      lab[i] = static_cast<int>(rng.UniformInt(l));
    }
    const OracleMap m = OracleBestMap(idx, lab);
    EXPECT_DOUBLE_EQ(m.accuracy, Purity(idx, lab));
    EXPECT_DOUBLE_EQ(m.accuracy, CountedPurity(idx, lab));
  }
}

TEST(OracleBestMap, SingleClusterAndTies) {
  const std::vector<int> idx{1, 1, 1, 1, 1};
  const std::vector<int> lab{2, 0, 2, 0, 1};
  const OracleMap m = OracleBestMap(idx, lab);
  ASSERT_EQ(m.cluster_to_label.size(), 1u);
  EXPECT_EQ(m.cluster_to_label[0], (std::pair<int, int>{1, 0}));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.4);
}

TEST(OracleBestMap, PureClusters) {
  const std::vector<int> idx{3, 1, 3, 2};
  const std::vector<int> lab{5, 4, 5, 0};
  EXPECT_EQ(OracleBestMap(idx, lab).accuracy, 1.0);
}

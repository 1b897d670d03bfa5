// tests/unit/eval_test.cc
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
#include <sstream>

#include "phonegan/eval/lexicon.h"
#include "phonegan/eval/metrics.h"
#include "phonegan/eval/supervised.h"
#include "phonegan/eval/sweep.h"
#include "phonegan/ganmap/generator.h"
#include "phonegan/synth/world.h"

using namespace phonegan;

namespace {

Lexicon ReadLex(const std::string &text, std::vector<std::string> inv = {}) {
  std::istringstream is(text);
  return Lexicon::Read(is, "lex", std::move(inv));
}

// Length-1 segments from a noiseless world: segment i is its prototype.
struct Segments {
  std::vector<Tensor> train, test;
  std::vector<int> train_labels, test_labels;
};

Segments WorldSegments(double sigma, std::uint64_t seed) {
  WorldConfig wc;
  wc.sigma = sigma;
  wc.seed = seed;
  const World w = GenWorld(wc);
  Segments s;
  auto fill = [&](std::size_t n, std::uint64_t cs, std::vector<Tensor> &out,
                  std::vector<int> &labels) {
    CorpusConfig cc;
    cc.num_utterances = n;
    cc.seed = cs;
    for (const auto &u : GenCorpus(w, cc).utterances) {
      for (std::size_t i = 0; i < u.labels.size(); ++i) {
        Tensor t({1, w.dim()});
        std::copy(u.embeddings.row(i).begin(), u.embeddings.row(i).end(), t.data().begin());
        out.push_back(t);
        labels.push_back(u.labels[i]);
      }
    }
  };
  fill(40, 1, s.train, s.train_labels);
  fill(10, 2, s.test, s.test_labels);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Lexicon and text.

TEST(Lexicon, ExpandsSentences) {
  const Lexicon lex = ReadLex("ab\tp0 p1\n");
  const std::vector<std::string> text{"ab ab"};
  const TextConversion c = TextToPhonemes(text, lex);
  ASSERT_EQ(c.sequences.size(), 1u);
  EXPECT_EQ(c.sequences[0], (std::vector<int>{0, 1, 0, 1}));
}

TEST(Lexicon, SkipsUnknownWords) {
  const Lexicon lex = ReadLex("ab\tp0 p1\ncd\tp1\n");
  const std::vector<std::string> text{"ab cd", "ab zz", "", "CD AB"};
  const TextConversion c = TextToPhonemes(text, lex);
  EXPECT_EQ(c.sequences.size(), 2u);
  EXPECT_EQ(c.skipped, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(c.sequences[1], (std::vector<int>{1, 0, 1}));
}

TEST(Lexicon, NothingSurvivesThrows) {
  const Lexicon lex = ReadLex("ab\tp0\n");
  const std::vector<std::string> text{"zz"};
  EXPECT_THROW(TextToPhonemes(text, lex), std::invalid_argument);
}

TEST(Lexicon, FixedInventory) {
  const Lexicon lex = ReadLex("a\tx\nb\ty\n", {"y", "x", "z"});
  EXPECT_EQ(lex.num_phonemes(), 3u);
  EXPECT_EQ(*lex.Find("a"), (std::vector<int>{1}));
  EXPECT_EQ(lex.PhonemeId("z"), 2);
  EXPECT_EQ(lex.PhonemeId("q"), -1);
  EXPECT_THROW(ReadLex("a\tq\n", {"x"}), std::invalid_argument);
}

TEST(Lexicon, MalformedLines) {
  EXPECT_THROW(ReadLex("no-tab-here\n"), std::invalid_argument);
  EXPECT_THROW(ReadLex("a\t\n"), std::invalid_argument);
}

TEST(Lexicon, OneHotRoundTrip) {
  const std::vector<int> ids{3, 0, 2, 2, 1};
  const PhonemeVectorSequence s = OneHotSequence(ids, 4, 7);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EXPECT_EQ(static_cast<int>(Argmax(s.vectors.row(i))), ids[i]);
  }
  EXPECT_EQ(s.valid_count(), 5u);
}

// ---------------------------------------------------------------------------
// Metrics.

TEST(Accuracy, Examples) {
  const std::vector<int> a{0, 1, 2}, d{0, 1, 3}, z{4, 4, 4};
  EXPECT_EQ(PhonemeAccuracy(a, a), 1.0);
  EXPECT_EQ(PhonemeAccuracy(z, a), 0.0);
  EXPECT_DOUBLE_EQ(PhonemeAccuracy(d, a), 2.0 / 3.0);
  EXPECT_THROW(PhonemeAccuracy(std::vector<int>{1}, a), std::invalid_argument);
}

TEST(Evaluate, ConfusionCounts) {
  const std::vector<int> pred{0, 1, 1, 2}, ref{0, 1, 2, 2};
  const EvalReport r = Evaluate(pred, ref, 3);
  EXPECT_EQ(r.count(2, 1), 1u);
  EXPECT_EQ(r.count(2, 2), 1u);
  EXPECT_EQ(r.trace(), 3u);
  EXPECT_EQ(r.n_segments, 4u);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.75);
  EXPECT_THROW(Evaluate(std::vector<int>{3}, std::vector<int>{0}, 3), std::invalid_argument);
  const auto j = r.ToJson();
  EXPECT_EQ(j["accuracy"].get<double>(), 0.75);
}

TEST(Baselines, RandomExpected) {
  EXPECT_NEAR(RandomBaselineExpected(39) * 100, 2.56, 0.005);
  EXPECT_EQ(RandomBaselineExpected(1), 1.0);
}

TEST(Baselines, RandomEmpiricalWithinBinomialBand) {
  const std::size_t n = 100000, L = 10;
  std::vector<int> ref(n);
  Rng rng(1);
  for (auto &r : ref) r = static_cast<int>(rng.UniformInt(L));
  const double acc = BaselineRandom(ref, L, 7).accuracy;
  const double p = 0.1, sd = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(acc, p, 3 * sd);
}

TEST(Baselines, MostFrequent) {
  EXPECT_DOUBLE_EQ(BaselineMostFrequent(std::vector<int>{0, 0, 1}, 2).accuracy, 2.0 / 3.0);
  EXPECT_EQ(BaselineMostFrequent(std::vector<int>{3, 3, 3}, 4).accuracy, 1.0);
  // Ties go to the lowest id.
  const EvalReport r = BaselineMostFrequent(std::vector<int>{2, 1, 2, 1}, 3);
  EXPECT_EQ(r.count(2, 1), 2u);
}

TEST(Ensemble, MajorityAndIdentity) {
  const std::vector<std::vector<int>> three{{0, 1}, {0, 2}, {1, 2}};
  EXPECT_EQ(EnsembleVote(three), (std::vector<int>{0, 2}));
  const std::vector<std::vector<int>> one{{4, 1, 3}};
  EXPECT_EQ(EnsembleVote(one), one[0]);
}

TEST(Ensemble, TieUsesSummedProbability) {
  const std::vector<std::vector<int>> four{{0}, {0}, {1}, {1}};
  std::vector<Tensor> probs{Tensor({1, 2}, {0.6, 0.4}), Tensor({1, 2}, {0.5, 0.5}),
                            Tensor({1, 2}, {0.2, 0.8}), Tensor({1, 2}, {0.3, 0.7})};
  EXPECT_EQ(EnsembleVote(four, probs), (std::vector<int>{1}));
  EXPECT_EQ(EnsembleVote(four), (std::vector<int>{0}));
  const std::vector<std::vector<int>> ragged{{0}, {0, 1}};
  EXPECT_THROW(EnsembleVote(ragged), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Supervised baseline.

TEST(Supervised, SeparableWorldFullFraction) {
  const Segments s = WorldSegments(0.0, 3);
  SupervisedConfig c;
  c.hidden = 16;
  c.epochs = 30;
  const SupervisedResult r = SupervisedBaseline({s.train, s.train_labels},
                                                {s.test, s.test_labels}, 1.0, 10, c);
  EXPECT_GE(r.test_accuracy, 0.95);
  EXPECT_EQ(r.train_used, s.train.size());
}

TEST(Supervised, FractionSubsetsAndWarnings) {
  const Segments s = WorldSegments(0.0, 4);
  SupervisedConfig c;
  c.hidden = 8;
  c.epochs = 2;
  const SupervisedResult r = SupervisedBaseline({s.train, s.train_labels},
                                                {s.test, s.test_labels}, 0.005, 10, c);
  EXPECT_EQ(r.train_used, static_cast<std::size_t>(std::ceil(0.005 * s.train.size())));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Supervised, RejectsBadFraction) {
  const Segments s = WorldSegments(0.0, 5);
  const SupervisedConfig c;
  for (double f : {0.0, -0.5, 1.5}) {
    EXPECT_THROW(SupervisedBaseline({s.train, s.train_labels}, {s.test, s.test_labels}, f, 10, c),
                 std::invalid_argument);
  }
}

TEST(Supervised, Defaults) {
  const SupervisedConfig c;
  EXPECT_EQ(c.hidden, 512u);
}

// ---------------------------------------------------------------------------
// Sweep.

TEST(Sweep, RowsRespectPurityAndCsv) {
  WorldConfig wc;
  wc.num_phonemes = 4;
  wc.sigma = 0.3;
  const World w = GenWorld(wc);
  CorpusConfig cc;
  cc.num_utterances = 30;
  const SynthCorpus corpus = GenCorpus(w, cc);
  const StackedCorpus st = Stack(corpus);
  EmbeddedCorpus train;
  for (const auto &u : corpus.utterances) train.ids.push_back(u.id);
  train.embeddings = st.embeddings;
  train.labels = st.labels;
  train.offsets = st.offsets;
  SweepConfig sc;
  sc.gan.iterations = 4;
  sc.gan.batch = 4;
  sc.gan.seq_len = 8;
  sc.gan.disc = DiscriminatorConfig{{3}, 2, 3, 2, 0.2};
  sc.jobs = 2;
  const std::vector<std::size_t> ks{4, 6};
  const std::vector<SweepRow> rows =
      SweepClusters(ks, train, EmbeddedCorpus{}, corpus.matched_text, 4, sc);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto &r : rows) {
    EXPECT_LE(r.acc_gumbel_train, r.purity_train);
    EXPECT_LE(r.acc_softmax_train, r.purity_train);
    EXPECT_LT(r.purity_test, 0.0);
  }
  sc.jobs = 1;
  const std::vector<SweepRow> serial =
      SweepClusters(ks, train, EmbeddedCorpus{}, corpus.matched_text, 4, sc);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(rows[i].acc_gumbel_train, serial[i].acc_gumbel_train);
  }
  std::ostringstream os;
  WriteSweepCsv(os, rows);
  const std::string csv = os.str();
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,purity_train,purity_test,acc_softmax_train,acc_softmax_test,"
            "acc_gumbel_train,acc_gumbel_test");
  EXPECT_NE(csv.find("\n4,"), std::string::npos);
}

TEST(Sweep, AccuracyAbovePurityIsRejected) {
  SweepRow r;
  r.k = 10;
  r.purity_train = 0.5;
  r.acc_gumbel_train = 0.6;
  EXPECT_THROW(CheckSweepRow(r), std::logic_error);
  r.acc_gumbel_train = 0.5;
  EXPECT_NO_THROW(CheckSweepRow(r));
}

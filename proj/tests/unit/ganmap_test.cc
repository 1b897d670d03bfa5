// tests/unit/ganmap_test.cc
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

#include "phonegan/ganmap/trainer.h"
#include "phonegan/ganmap/wgan.h"
#include "phonegan/numcore/gradcheck.h"
#include "support/critics.h"

using namespace phonegan;
using phonegan::testing::ConstantCritic;
using phonegan::testing::LinearCritic;

namespace {

PhonemeVectorSequence RandomSeq(std::size_t n, std::size_t L, Rng &rng) {
  PhonemeVectorSequence s{Tensor({n, L}), std::vector<std::uint8_t>(n, 1)};
  for (double &v : s.vectors.data()) v = rng.Uniform();
  return s;
}

PhonemeVectorBatch RandomBatch(std::size_t b, std::size_t n, std::size_t L,
                               Rng &rng) {
  PhonemeVectorBatch out;
  for (std::size_t i = 0; i < b; ++i) out.push_back(RandomSeq(n, L, rng));
  return out;
}

DiscriminatorConfig Small() { return DiscriminatorConfig{{3, 5}, 3, 3, 4, 0.2}; }

// Tiny corpus where cluster k always realizes phoneme k - 1.
struct ToyCorpus {
  std::vector<ClusterIndexSequence> clusters;
  std::vector<std::vector<int>> text;
};

ToyCorpus Toy(std::size_t n, std::size_t L, Rng &rng) {
  ToyCorpus c;
  for (std::size_t u = 0; u < n; ++u) {
    ClusterIndexSequence s{"u" + std::to_string(u), {}};
    std::vector<int> t;
    int p = static_cast<int>(rng.UniformInt(L));
    for (int i = 0; i < 12; ++i) {
      p = (p + 1 + static_cast<int>(rng.UniformInt(2))) % static_cast<int>(L);
      s.indices.push_back(p + 1);
      t.push_back(p);
    }
    c.clusters.push_back(s);
    c.text.push_back(t);
  }
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Generator.

TEST(Generator, ZeroRowIsUniform) {
  LookupTable t(3, 4);
  Rng rng(1);
  const GeneratedSequence g = Generate(std::vector<int>{2}, t, GeneratorMode::kSoftmax, 0.9, rng);
  for (double v : g.output.vectors.data()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Generator, RepeatedIndexGivesIdenticalRows) {
  Rng rng(2);
  const LookupTable t = LookupTable::Random(4, 5, 1.0, rng);
  const GeneratedSequence g =
      Generate(std::vector<int>{3, 1, 3}, t, GeneratorMode::kSoftmax, 0.9, rng);
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_EQ(g.output.vectors.at(0, j), g.output.vectors.at(2, j));
  }
  const auto want = Softmax(t.Row(3));
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(g.output.vectors.at(0, j), want[j], 1e-15);
}

TEST(Generator, GumbelRowsAreOneHot) {
  Rng rng(3);
  const LookupTable t = LookupTable::Random(4, 5, 1.0, rng);
  const GeneratedSequence g =
      Generate(std::vector<int>{1, 2, 3, 4, 1}, t, GeneratorMode::kGumbel, 0.9, rng, 8);
  ASSERT_EQ(g.output.length(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      const double v = g.output.vectors.at(i, j);
      EXPECT_TRUE(v == 0.0 || v == 1.0);
      sum += v;
    }
    EXPECT_EQ(sum, i < 5 ? 1.0 : 0.0);
    EXPECT_EQ(g.output.mask[i], i < 5 ? 1 : 0);
  }
}

TEST(Generator, RejectsOutOfRangeIndices) {
  LookupTable t(3, 2);
  Rng rng(4);
  EXPECT_ANY_THROW(Generate(std::vector<int>{0}, t, GeneratorMode::kSoftmax, 1.0, rng));
  EXPECT_ANY_THROW(Generate(std::vector<int>{4}, t, GeneratorMode::kSoftmax, 1.0, rng));
  EXPECT_ANY_THROW(Decode(std::vector<int>{4}, t));
}

TEST(Decode, UniqueMaxAndShiftInvariance) {
  Tensor e({2, 3}, {0.1, 2.0, -1.0, 5.0, 4.0, 4.5});
  LookupTable t(e);
  EXPECT_EQ(Decode(std::vector<int>{1, 2, 1}, t), (std::vector<int>{1, 0, 1}));
  // Adding a constant to a phoneme column shifts every row equally in that
  // column; a large enough constant changes the winner only where it should.
  Tensor e2 = e;
  for (std::size_t k = 0; k < 2; ++k) e2.at(k, 2) += 0.7;
  const std::vector<int> d2 = Decode(std::vector<int>{1, 2}, LookupTable(e2));
  EXPECT_EQ(d2[0], 1);
  EXPECT_EQ(d2[1], 2);
  // A constant added to a whole row leaves that row's decision alone.
  Tensor e3 = e;
  for (std::size_t j = 0; j < 3; ++j) e3.at(1, j) += 10.0;
  EXPECT_EQ(Decode(std::vector<int>{1, 2}, LookupTable(e3)), (std::vector<int>{1, 0}));
}

TEST(Decode, AgreesWithSoftmaxArgmax) {
  Rng rng(5);
  const LookupTable t = LookupTable::Random(20, 7, 2.0, rng);
  std::vector<int> idx;
  for (int k = 1; k <= 20; ++k) idx.push_back(k);
  const std::vector<int> d = Decode(idx, t);
  const GeneratedSequence g = Generate(idx, t, GeneratorMode::kSoftmax, 0.9, rng);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    EXPECT_EQ(d[i], static_cast<int>(Argmax(g.output.vectors.row(i))));
  }
}

TEST(Decode, ClusterToPhonemeIsPerRowArgmax) {
  LookupTable t(Tensor({3, 2}, {1, 0, 0, 1, 2, 2}));
  EXPECT_EQ(ClusterToPhoneme(t), (std::vector<int>{0, 1, 0}));
}

TEST(Generator, ModeNames) {
  EXPECT_EQ(ParseMode("gumbel"), GeneratorMode::kGumbel);
  EXPECT_EQ(ParseMode(ModeName(GeneratorMode::kSoftmax)), GeneratorMode::kSoftmax);
  EXPECT_ANY_THROW(ParseMode("argmax"));
}

// ---------------------------------------------------------------------------
// Discriminator.

TEST(Discriminator, ZeroWeightsScoreZero) {
  Rng rng(6);
  Discriminator d(4, Small(), rng);
  d.SetZero();
  for (int i = 0; i < 5; ++i) EXPECT_EQ(d.Score(RandomSeq(7, 4, rng)), 0.0);
}

TEST(Discriminator, MaskedPaddingLeavesScoreUnchanged) {
  Rng rng(7);
  Discriminator d(4, Small(), rng);
  const PhonemeVectorSequence s = RandomSeq(6, 4, rng);
  PhonemeVectorSequence padded{Tensor({10, 4}), std::vector<std::uint8_t>(10, 0)};
  for (std::size_t i = 0; i < 6; ++i) {
    padded.mask[i] = 1;
    for (std::size_t j = 0; j < 4; ++j) padded.vectors.at(i, j) = s.vectors.at(i, j);
  }
  for (std::size_t i = 6; i < 10; ++i) {
    for (std::size_t j = 0; j < 4; ++j) padded.vectors.at(i, j) = 9.0;  // ignored
  }
  EXPECT_NEAR(d.Score(s), d.Score(padded), 1e-12);
}

TEST(Discriminator, BatchedForwardMatchesSingle) {
  Rng rng(8);
  Discriminator d(4, Small(), rng);
  PhonemeVectorBatch batch{RandomSeq(5, 4, rng), RandomSeq(2, 4, rng), RandomSeq(9, 4, rng)};
  DiscriminatorCache cache;
  const std::vector<double> scores = d.Forward(batch, cache);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_NEAR(scores[i], d.Score(batch[i]), 1e-12);
  }
}

TEST(Discriminator, InputGradientMatchesFiniteDifferences) {
  Rng rng(9);
  Discriminator d(4, Small(), rng);
  PhonemeVectorSequence seq = RandomSeq(6, 4, rng);
  auto f = [&](const Tensor &x, Tensor *grad) {
    PhonemeVectorSequence s{x, seq.mask};
    DiscriminatorCache c;
    const double v = d.Forward(s, c);
    if (grad) d.Backward(c, 1.0, false, grad);
    return v;
  };
  EXPECT_LE(GradCheck(f, seq.vectors).max_rel_error, 1e-4);
}

TEST(Discriminator, ParamGradientMatchesFiniteDifferences) {
  Rng rng(10);
  Discriminator d(4, Small(), rng);
  const PhonemeVectorBatch batch = RandomBatch(3, 6, 4, rng);
  const std::vector<double> dout{0.5, -1.0, 2.0};
  for (Parameter *p : d.parameters()) {
    auto f = [&](const Tensor &x, Tensor *grad) {
      const Tensor saved = p->value;
      p->value = x;
      d.ZeroGrad();
      DiscriminatorCache c;
      const std::vector<double> s = d.Forward(batch, c);
      double v = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) v += dout[i] * s[i];
      if (grad) {
        d.Backward(c, dout, true, nullptr);
        *grad = p->grad;
      }
      p->value = saved;
      return v;
    };
    EXPECT_LE(GradCheck(f, p->value).max_rel_error, 1e-4);
  }
}

TEST(Discriminator, FullScaleArchitecture) {
  const DiscriminatorConfig c = FullScaleDiscriminator();
  EXPECT_EQ(c.branch_widths, (std::vector<std::size_t>{3, 5, 7, 9}));
  EXPECT_EQ(c.branch_channels, 256u);
  EXPECT_EQ(c.conv2_width, 3u);
  EXPECT_EQ(c.conv2_channels, 1024u);
}

TEST(Discriminator, RejectsBadConfig) {
  EXPECT_ANY_THROW(Discriminator(4, DiscriminatorConfig{{4}, 2, 3, 2, 0.2}));
  EXPECT_ANY_THROW(Discriminator(4, DiscriminatorConfig{{3}, 2, 3, 2, 1.5}));
  EXPECT_ANY_THROW(Discriminator(4, DiscriminatorConfig{{}, 2, 3, 2, 0.2}));
}

// ---------------------------------------------------------------------------
// WGAN-GP.

TEST(Critics, LinearCriticIsLinear) {
  const std::vector<double> w{1.0, -2.0, 2.0};
  Discriminator d = LinearCritic(w);
  Rng rng(11);
  const PhonemeVectorSequence s = RandomSeq(4, 3, rng);
  double want = 0.0;
  for (std::size_t t = 0; t < 4; ++t)
    for (std::size_t j = 0; j < 3; ++j) want += w[j] * s.vectors.at(t, j) / 4.0;
  EXPECT_NEAR(d.Score(s), want, 1e-9);
}

TEST(GradientPenalty, ConstantCriticGivesOne) {
  Discriminator d = ConstantCritic(4, 2.5);
  Rng rng(12);
  const auto real = RandomBatch(5, 6, 4, rng), fake = RandomBatch(5, 6, 4, rng);
  EXPECT_NEAR(GradientPenalty(d, real, fake, rng).penalty, 1.0, 1e-12);
}

TEST(GradientPenalty, LinearCriticNorms) {
  // One valid row: the input gradient is w itself.
  for (double norm : {1.0, 3.0}) {
    const std::vector<double> w{0.6 * norm, 0.0, -0.8 * norm};
    Discriminator d = LinearCritic(w);
    Rng rng(13);
    const auto real = RandomBatch(4, 1, 3, rng), fake = RandomBatch(4, 1, 3, rng);
    const PenaltyResult r = GradientPenalty(d, real, fake, rng);
    for (double g : r.grad_norms) EXPECT_NEAR(g, norm, 1e-9);
    EXPECT_NEAR(r.penalty, (norm - 1) * (norm - 1), 1e-9);
  }
}

TEST(GradientPenalty, InterpolationUsesOneEpsilonPerSequence) {
  Rng rng(14);
  const PhonemeVectorSequence a = RandomSeq(3, 2, rng), b = RandomSeq(5, 2, rng);
  const PhonemeVectorSequence x = Interpolate(a, b, 0.25);
  ASSERT_EQ(x.length(), 5u);
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double av = t < 3 ? a.vectors.at(t, j) : 0.0;
      EXPECT_NEAR(x.vectors.at(t, j), 0.25 * av + 0.75 * b.vectors.at(t, j), 1e-15);
    }
    EXPECT_EQ(x.mask[t], 1);
  }
}

TEST(GradientPenalty, ParamGradientMatchesFiniteDifferences) {
  Rng rng(15);
  Discriminator d(4, Small(), rng);
  const auto real = RandomBatch(2, 6, 4, rng), fake = RandomBatch(2, 6, 4, rng);
  for (Parameter *p : d.parameters()) {
    auto f = [&](const Tensor &x, Tensor *grad) {
      const Tensor saved = p->value;
      p->value = x;
      d.ZeroGrad();
      Rng r(7);
      const double v = GradientPenalty(d, real, fake, r, grad ? 1.0 : 0.0).penalty;
      if (grad) *grad = p->grad;
      p->value = saved;
      return v;
    };
    EXPECT_LE(GradCheck(f, p->value, 1e-6).max_rel_error, 1e-4);
  }
}

TEST(DLoss, ConstantCriticGivesLambda) {
  Discriminator d = ConstantCritic(4, -1.25);
  Rng rng(16);
  const auto real = RandomBatch(6, 5, 4, rng), fake = RandomBatch(6, 5, 4, rng);
  EXPECT_NEAR(DLoss(d, real, fake, 10.0, rng, false).loss, 10.0, 1e-9);
}

TEST(DLoss, IdenticalBatchesCancel) {
  Rng rng(17);
  Discriminator d(4, Small(), rng);
  const auto real = RandomBatch(4, 6, 4, rng);
  const CriticLoss l = DLoss(d, real, real, 0.0, rng, false);
  EXPECT_NEAR(l.loss, 0.0, 1e-12);
  EXPECT_NEAR(l.real_mean, l.fake_mean, 1e-12);
}

TEST(DLoss, ParamGradientMatchesFiniteDifferences) {
  Rng rng(18);
  Discriminator d(4, Small(), rng);
  const auto real = RandomBatch(3, 5, 4, rng), fake = RandomBatch(3, 5, 4, rng);
  for (Parameter *p : d.parameters()) {
    auto f = [&](const Tensor &x, Tensor *grad) {
      const Tensor saved = p->value;
      p->value = x;
      d.ZeroGrad();
      Rng r(3);
      const double v = DLoss(d, real, fake, 10.0, r, grad != nullptr).loss;
      if (grad) *grad = p->grad;
      p->value = saved;
      return v;
    };
    EXPECT_LE(GradCheck(f, p->value, 1e-6).max_rel_error, 1e-4);
  }
}

TEST(GLoss, ConstantCritic) {
  Discriminator d = ConstantCritic(3, 0.75);
  Rng rng(19);
  LookupTable t = LookupTable::Random(4, 3, 1.0, rng);
  const GeneratedSequence g =
      Generate(std::vector<int>{1, 2, 3, 4}, t, GeneratorMode::kSoftmax, 0.9, rng);
  const GeneratorLoss l = GLoss(d, std::vector<PhonemeVectorSequence>{g.output}, true);
  EXPECT_DOUBLE_EQ(l.loss, -0.75);
  t.parameter().ZeroGrad();
  GenerateBackward(g, l.dfake[0], t);
  for (double v : t.parameter().grad.data()) EXPECT_EQ(v, 0.0);
}

TEST(GLoss, IsNegativeMeanScore) {
  Rng rng(20);
  Discriminator d(4, Small(), rng);
  const auto fake = RandomBatch(5, 6, 4, rng);
  double mean = 0.0;
  for (const auto &s : fake) mean += d.Score(s) / 5.0;
  EXPECT_NEAR(GLoss(d, fake, false).loss, -mean, 1e-12);
  EXPECT_NEAR(MeanScore(d, fake), mean, 1e-12);
}

TEST(GLoss, LinearCriticPushesTowardRewardedPhoneme) {
  const std::vector<double> w{0.0, 0.0, 1.0};  // rewards phoneme 2
  Discriminator d = LinearCritic(w);
  Rng rng(21);
  LookupTable t = LookupTable::Random(3, 3, 0.5, rng);
  const GeneratedSequence g =
      Generate(std::vector<int>{1, 2, 3}, t, GeneratorMode::kSoftmax, 0.9, rng);
  const GeneratorLoss l = GLoss(d, std::vector<PhonemeVectorSequence>{g.output}, true);
  t.parameter().ZeroGrad();
  GenerateBackward(g, l.dfake[0], t);
  for (int k = 0; k < 3; ++k) {
    const auto y = Softmax(t.Row(k + 1));
    // dL/de_kj = -(1/n) y_j (w_j - <y, w>), with n = 3.
    for (int j = 0; j < 3; ++j) {
      const double want = -(1.0 / 3.0) * y[j] * (w[j] - y[2]);
      EXPECT_NEAR(t.parameter().grad.at(k, j), want, 1e-9);
    }
    EXPECT_LT(t.parameter().grad.at(k, 2), 0.0);
  }
}

TEST(GLoss, TableGradientMatchesFiniteDifferences) {
  Rng rng(22);
  Discriminator d(4, Small(), rng);
  const LookupTable table = LookupTable::Random(3, 4, 1.0, rng);
  const std::vector<int> idx{1, 2, 3, 1, 2};
  auto f = [&](const Tensor &x, Tensor *grad) {
    LookupTable t(x);
    Rng r(5);
    const GeneratedSequence g = Generate(idx, t, GeneratorMode::kSoftmax, 1.0, r, 7);
    const GeneratorLoss gl = GLoss(d, std::vector<PhonemeVectorSequence>{g.output}, grad != nullptr);
    if (grad) {
      GenerateBackward(g, gl.dfake[0], t);
      *grad = t.parameter().grad;
    }
    return gl.loss;
  };
  EXPECT_LE(GradCheck(f, table.logits()).max_rel_error, 1e-4);
}

TEST(GLoss, OneStepDescentWithFrozenCritic) {
  Rng rng(23);
  Discriminator d(4, Small(), rng);
  LookupTable t = LookupTable::Random(3, 4, 0.3, rng);
  const std::vector<int> idx{1, 2, 3, 3, 1};
  auto loss = [&](const LookupTable &tab, bool grads) {
    Rng r(1);
    const GeneratedSequence g = Generate(idx, tab, GeneratorMode::kSoftmax, 0.9, r);
    return std::make_pair(GLoss(d, std::vector<PhonemeVectorSequence>{g.output}, grads), g);
  };
  auto [l0, g0] = loss(t, true);
  t.parameter().ZeroGrad();
  GenerateBackward(g0, l0.dfake[0], t);
  LookupTable stepped(t.logits());
  for (std::size_t i = 0; i < t.logits().size(); ++i) {
    stepped.logits()[i] -= 1e-3 * t.parameter().grad[i];
  }
  EXPECT_LT(loss(stepped, false).first.loss, l0.loss);
}

// ---------------------------------------------------------------------------
// Trainer.

TEST(Trainer, Defaults) {
  const GanConfig c;
  EXPECT_EQ(c.mode, GeneratorMode::kGumbel);
  EXPECT_EQ(c.inv_temp, 0.9);
  EXPECT_EQ(c.lr_g, 0.01);
  EXPECT_EQ(c.lr_d, 0.001);
  EXPECT_EQ(c.d_steps_per_g, 3);
  EXPECT_EQ(c.gp_lambda, 10.0);
  EXPECT_EQ(c.batch, 128u);
  EXPECT_EQ(c.seq_len, 32u);
  EXPECT_EQ(c.iterations, 5000);
  EXPECT_EQ(c.adam.beta1, 0.9);
  EXPECT_EQ(c.adam.beta2, 0.999);
  EXPECT_EQ(c.adam.epsilon, 1e-8);
}

TEST(Trainer, SampleWindow) {
  Rng rng(24);
  EXPECT_EQ(SampleWindow(5, 8, rng), (std::pair<std::size_t, std::size_t>{0, 5}));
  std::vector<int> seen(4, 0);
  for (int i = 0; i < 400; ++i) {
    const auto [start, len] = SampleWindow(11, 8, rng);
    ASSERT_EQ(len, 8u);
    ASSERT_LE(start, 3u);
    seen[start]++;
  }
  for (int s : seen) EXPECT_GT(s, 0);
}

TEST(Trainer, DeterministicPerSeed) {
  Rng rng(25);
  const ToyCorpus c = Toy(30, 4, rng);
  GanConfig g;
  g.iterations = 8;
  g.batch = 8;
  g.seq_len = 8;
  g.log_every = 4;
  g.disc = Small();
  g.seed = 3;
  const GanResult a = TrainGan(c.clusters, c.text, 4, 4, g);
  const GanResult b = TrainGan(c.clusters, c.text, 4, 4, g);
  EXPECT_EQ(a.table.logits().values(), b.table.logits().values());
  EXPECT_EQ(a.iterations_run, 8);
  ASSERT_EQ(a.log.size(), b.log.size());
  g.seed = 4;
  const GanResult other = TrainGan(c.clusters, c.text, 4, 4, g);
  EXPECT_NE(a.table.logits().values(), other.table.logits().values());
}

TEST(Trainer, CriticLossFallsEarlyOnSeparableData) {
  Rng rng(26);
  const ToyCorpus c = Toy(40, 4, rng);
  GanConfig g;
  g.iterations = 40;
  g.batch = 16;
  g.seq_len = 8;
  g.log_every = 1;
  g.disc = Small();
  g.seed = 1;
  const GanResult r = TrainGan(c.clusters, c.text, 4, 4, g);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 5; ++i) {
    first += r.log[static_cast<std::size_t>(i)].d_loss;
    last += r.log[r.log.size() - 1 - static_cast<std::size_t>(i)].d_loss;
  }
  EXPECT_LT(last, first);
}

TEST(Trainer, ProbeIsLoggedButNeverUsed) {
  Rng rng(27);
  const ToyCorpus c = Toy(20, 3, rng);
  GanConfig g;
  g.iterations = 4;
  g.batch = 4;
  g.seq_len = 6;
  g.log_every = 2;
  g.disc = Small();
  const ProbeSet probe{c.clusters, c.text};
  const GanResult with = TrainGan(c.clusters, c.text, 3, 3, g, &probe);
  const GanResult without = TrainGan(c.clusters, c.text, 3, 3, g);
  EXPECT_EQ(with.table.logits().values(), without.table.logits().values());
  for (const auto &row : with.log) {
    EXPECT_GE(row.probe_accuracy, 0.0);
    EXPECT_LE(row.probe_accuracy, 1.0);
  }
  for (const auto &row : without.log) EXPECT_LT(row.probe_accuracy, 0.0);
  EXPECT_NEAR(with.log.back().probe_accuracy, ProbeAccuracy(with.table, probe), 1e-15);
}

TEST(Trainer, PlateauStopsEarly) {
  Rng rng(28);
  const ToyCorpus c = Toy(20, 3, rng);
  GanConfig g;
  g.iterations = 400;
  g.batch = 4;
  g.seq_len = 6;
  g.disc = Small();
  g.plateau_window = 5;
  g.plateau_tol = 1e9;
  const GanResult r = TrainGan(c.clusters, c.text, 3, 3, g);
  EXPECT_TRUE(r.early_stopped);
  EXPECT_LT(r.iterations_run, 400);
}

TEST(Trainer, RejectsInvalidInputs) {
  Rng rng(29);
  const ToyCorpus c = Toy(5, 3, rng);
  GanConfig g;
  g.iterations = 1;
  g.disc = Small();
  EXPECT_ANY_THROW(TrainGan(c.clusters, c.text, 2, 3, g));  // index 3 > K
  EXPECT_ANY_THROW(TrainGan({}, c.text, 3, 3, g));
  EXPECT_ANY_THROW(TrainGan(c.clusters, {}, 3, 3, g));
  std::vector<std::vector<int>> bad = c.text;
  bad[0][0] = 7;
  EXPECT_ANY_THROW(TrainGan(c.clusters, bad, 3, 3, g));
  g.lr_g = 0.0;
  EXPECT_THROW(TrainGan(c.clusters, c.text, 3, 3, g), std::invalid_argument);
}

TEST(Trainer, LogCsv) {
  std::ostringstream os;
  const std::vector<TrainLogRow> rows{{50, -1.5, 0.25, 0.125, -1.0}, {100, 2.0, 1.0, 0.5, 0.75}};
  WriteTrainLogCsv(os, rows);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "iteration,d_loss,g_loss,gp,probe_accuracy");
  EXPECT_NE(s.find("100,2,1,0.5,0.75"), std::string::npos);
}

// ganmap/trainer.cc
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

#include "phonegan/ganmap/trainer.h"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "phonegan/ganmap/wgan.h"
#include "phonegan/numcore/error.h"

namespace phonegan {

namespace {

PhonemeVectorBatch SampleReal(std::span<const std::vector<int>> corpus,
                              std::size_t batch, std::size_t seq_len,
                              std::size_t num_phonemes, Rng &rng) {
  PhonemeVectorBatch out;
  out.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const auto &seq = corpus[rng.UniformInt(corpus.size())];
    auto [start, len] = SampleWindow(seq.size(), seq_len, rng);
    out.push_back(OneHotSequence(std::span(seq).subspan(start, len),
                                 num_phonemes, seq_len));
  }
  return out;
}

std::vector<GeneratedSequence> SampleFake(
    std::span<const ClusterIndexSequence> corpus, const LookupTable &table,
    const GanConfig &config, Rng &rng) {
  std::vector<GeneratedSequence> out;
  out.reserve(config.batch);
  for (std::size_t b = 0; b < config.batch; ++b) {
    const auto &seq = corpus[rng.UniformInt(corpus.size())].indices;
    auto [start, len] = SampleWindow(seq.size(), config.seq_len, rng);
    out.push_back(Generate(std::span(seq).subspan(start, len), table,
                           config.mode, config.inv_temp, rng, config.seq_len));
  }
  return out;
}

PhonemeVectorBatch Outputs(const std::vector<GeneratedSequence> &generated) {
  PhonemeVectorBatch out;
  out.reserve(generated.size());
  for (const auto &g : generated) out.push_back(g.output);
  return out;
}

void CheckFiniteLoss(double v, const char *what, int iteration) {
  if (!std::isfinite(v)) {
    throw DivergenceError(std::string("gan training: non-finite ") + what,
                          iteration);
  }
}

}  // namespace

void GanConfig::Validate() const {
  if (!(inv_temp > 0.0) || !(lr_g > 0.0) || !(lr_d > 0.0) ||
      d_steps_per_g < 1 || !(gp_lambda >= 0.0) || batch < 1 || seq_len < 1 ||
      iterations < 0 || !(e_init_stddev >= 0.0)) {
    throw std::invalid_argument("gan config: hyperparameters must be positive");
  }
}

DiscriminatorConfig FullScaleDiscriminator() {
  return DiscriminatorConfig{{3, 5, 7, 9}, 256, 3, 1024, 0.2};
}

std::pair<std::size_t, std::size_t> SampleWindow(std::size_t length,
                                                 std::size_t seq_len,
                                                 Rng &rng) {
  if (length <= seq_len) return {0, length};
  return {static_cast<std::size_t>(rng.UniformInt(length - seq_len + 1)),
          seq_len};
}

double ProbeAccuracy(const LookupTable &table, const ProbeSet &probe) {
  if (probe.clusters.size() != probe.labels.size()) {
    throw std::invalid_argument("probe: clusters and labels differ in count");
  }
  const std::vector<int> map = ClusterToPhoneme(table);
  std::size_t correct = 0, total = 0;
  for (std::size_t u = 0; u < probe.clusters.size(); ++u) {
    const auto &idx = probe.clusters[u].indices;
    const auto &lab = probe.labels[u];
    if (idx.size() != lab.size()) {
      throw std::invalid_argument("probe: length mismatch for " +
                                  probe.clusters[u].id);
    }
    for (std::size_t i = 0; i < idx.size(); ++i, ++total) {
      if (map[static_cast<std::size_t>(idx[i] - 1)] == lab[i]) ++correct;
    }
  }
  return total == 0 ? 0.0
                    : static_cast<double>(correct) / static_cast<double>(total);
}

GanResult TrainGan(std::span<const ClusterIndexSequence> clusters,
                   std::span<const std::vector<int>> phonemes,
                   std::size_t num_clusters, std::size_t num_phonemes,
                   const GanConfig &config, const ProbeSet *probe) {
  config.Validate();
  if (clusters.empty()) throw std::invalid_argument("gan: no cluster sequences");
  if (phonemes.empty()) throw std::invalid_argument("gan: no phoneme sequences");
  for (const auto &seq : phonemes) {
    if (seq.empty()) throw std::invalid_argument("gan: empty phoneme sequence");
    for (int p : seq) {
      if (p < 0 || static_cast<std::size_t>(p) >= num_phonemes) {
        throw std::invalid_argument("gan: phoneme id " + std::to_string(p) +
                                    " outside [0, " +
                                    std::to_string(num_phonemes) + ")");
      }
    }
  }
  GanResult result;
  Rng root(config.seed);
  Rng init_rng = root.Derive("init");
  Rng real_rng = root.Derive("real");
  Rng fake_rng = root.Derive("fake");
  Rng gp_rng = root.Derive("penalty");

  result.table = LookupTable::Random(num_clusters, num_phonemes,
                                     config.e_init_stddev, init_rng);
  for (const auto &seq : clusters) {
    if (seq.indices.empty()) {
      throw std::invalid_argument("gan: empty cluster sequence " + seq.id);
    }
    result.table.CheckIndices(seq.indices);
  }
  Discriminator critic(num_phonemes, config.disc, init_rng);
  Adam d_opt(critic.parameters(), config.lr_d, config.adam);
  Adam g_opt({&result.table.parameter()}, config.lr_g, config.g_adam);

  double window_sum = 0.0, prev_window = 0.0;
  bool have_prev = false;
  for (int it = 1; it <= config.iterations; ++it) {
    CriticLoss closs;
    for (int s = 0; s < config.d_steps_per_g; ++s) {
      const PhonemeVectorBatch real =
          SampleReal(phonemes, config.batch, config.seq_len, num_phonemes,
                     real_rng);
      const PhonemeVectorBatch fake =
          Outputs(SampleFake(clusters, result.table, config, fake_rng));
      critic.ZeroGrad();
      closs = DLoss(critic, real, fake, config.gp_lambda, gp_rng, true);
      CheckFiniteLoss(closs.loss, "critic loss", it);
      d_opt.Step();
    }

    const std::vector<GeneratedSequence> generated =
        SampleFake(clusters, result.table, config, fake_rng);
    const PhonemeVectorBatch fake = Outputs(generated);
    GeneratorLoss gloss = GLoss(critic, fake, true);
    CheckFiniteLoss(gloss.loss, "generator loss", it);
    g_opt.ZeroGrad();
    for (std::size_t b = 0; b < generated.size(); ++b) {
      GenerateBackward(generated[b], gloss.dfake[b], result.table);
    }
    g_opt.Step();
    result.iterations_run = it;

    if (config.log_every > 0 &&
        (it % config.log_every == 0 || it == config.iterations)) {
      TrainLogRow row{it, closs.loss, gloss.loss, closs.penalty, -1.0};
      if (probe) row.probe_accuracy = ProbeAccuracy(result.table, *probe);
      result.log.push_back(row);
    }

    if (config.plateau_window > 0) {
      window_sum += gloss.loss;
      if (it % config.plateau_window == 0) {
        const double mean = window_sum / config.plateau_window;
        window_sum = 0.0;
        if (have_prev && std::abs(mean - prev_window) < config.plateau_tol) {
          result.early_stopped = true;
          break;
        }
        prev_window = mean;
        have_prev = true;
      }
    }
  }
  return result;
}

void WriteTrainLogCsv(std::ostream &os, std::span<const TrainLogRow> log) {
  os << "iteration,d_loss,g_loss,gp,probe_accuracy\n";
  os << std::setprecision(10);
  for (const auto &r : log) {
    os << r.iteration << ',' << r.d_loss << ',' << r.g_loss << ',' << r.gp
       << ',';
    if (r.probe_accuracy >= 0.0) os << r.probe_accuracy;
    os << '\n';
  }
}

}  // namespace phonegan

// phonegan/ganmap/trainer.h
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

#ifndef PHONEGAN_GANMAP_TRAINER_H_
#define PHONEGAN_GANMAP_TRAINER_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "phonegan/cluster/kmeans.h"
#include "phonegan/ganmap/discriminator.h"
#include "phonegan/ganmap/generator.h"
#include "phonegan/numcore/adam.h"

namespace phonegan {

struct GanConfig {
  GeneratorMode mode = GeneratorMode::kGumbel;
  double inv_temp = 0.9;
  double lr_g = 0.01;
  double lr_d = 0.001;
  int d_steps_per_g = 3;
  double gp_lambda = 10.0;
  std::size_t batch = 128;
  std::size_t seq_len = 32;
  int iterations = 5000;  // generator updates
  std::uint64_t seed = 0;
  double e_init_stddev = 0.1;
  DiscriminatorConfig disc{{3, 5, 7, 9}, 16, 3, 64, 0.2};
  AdamConfig adam;    // critic
  AdamConfig g_adam{0.9, 0.999, 1e-8, true};  // generator
  int log_every = 50;
  // Stop once g_loss, averaged over consecutive windows of this many
  // iterations, changes by less than plateau_tol. 0 disables.
  int plateau_window = 0;
  double plateau_tol = 1e-3;

  void Validate() const;
};

// The architecture reported for the full-size critic (256 channels per
// branch, 1024 in the second layer). The desk default above is narrower.
DiscriminatorConfig FullScaleDiscriminator();

struct TrainLogRow {
  int iteration = 0;
  double d_loss = 0.0;
  double g_loss = 0.0;
  double gp = 0.0;
  double probe_accuracy = -1.0;  // negative when no probe labels
};

// Reference labels used only to report accuracy in the training log; they
// never influence an update.
struct ProbeSet {
  std::span<const ClusterIndexSequence> clusters;
  std::span<const std::vector<int>> labels;
};

struct GanResult {
  LookupTable table;
  std::vector<TrainLogRow> log;
  int iterations_run = 0;
  bool early_stopped = false;
};

// Fixed-length training windows: a random crop of seq_len when the
// sequence is longer, the whole sequence otherwise.
std::pair<std::size_t, std::size_t> SampleWindow(std::size_t length,
                                                 std::size_t seq_len, Rng &rng);

// Alternates d_steps_per_g critic updates with one generator update, Adam
// on both. Deterministic per config.seed. Throws DivergenceError naming
// the iteration if a loss turns non-finite.
GanResult TrainGan(std::span<const ClusterIndexSequence> clusters,
                   std::span<const std::vector<int>> phonemes,
                   std::size_t num_clusters, std::size_t num_phonemes,
                   const GanConfig &config, const ProbeSet *probe = nullptr);

double ProbeAccuracy(const LookupTable &table, const ProbeSet &probe);

void WriteTrainLogCsv(std::ostream &os, std::span<const TrainLogRow> log);

}  // namespace phonegan

#endif  // PHONEGAN_GANMAP_TRAINER_H_

// phonegan/eval/sweep.h
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

// Cluster-count sweep: K-means, GAN mapping in both generator modes and
// scoring against the purity ceiling, once per K.

#ifndef PHONEGAN_EVAL_SWEEP_H_
#define PHONEGAN_EVAL_SWEEP_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "phonegan/cluster/kmeans.h"
#include "phonegan/ganmap/trainer.h"

namespace phonegan {

// Segment embeddings of a set of utterances, stacked row-wise. Utterance u
// owns rows [offsets[u], offsets[u + 1]).
struct EmbeddedCorpus {
  std::vector<std::string> ids;
  Tensor embeddings;
  std::vector<int> labels;  // one per row, used only for scoring
  std::vector<std::size_t> offsets;

  std::size_t num_utterances() const { return ids.size(); }
  void Validate() const;
};

std::vector<ClusterIndexSequence> ToClusterSequences(
    const EmbeddedCorpus &corpus, std::span<const int> assignment);

struct SweepConfig {
  KMeansConfig kmeans;  // k is overridden per point
  GanConfig gan;        // mode and seed are overridden per run
  std::uint64_t seed = 0;
  int jobs = 1;
  bool run_softmax = true;
  bool run_gumbel = true;
};

struct SweepRow {
  std::size_t k = 0;
  double purity_train = 0.0;
  double purity_test = 0.0;
  // Negative when the mode was not run.
  double acc_softmax_train = -1.0;
  double acc_softmax_test = -1.0;
  double acc_gumbel_train = -1.0;
  double acc_gumbel_test = -1.0;
};

// Everything one sweep point produces; the tables are kept for callers
// that want to decode further.
struct SweepPointResult {
  SweepRow row;
  Codebook codebook;
  std::vector<ClusterIndexSequence> train_clusters;
  std::vector<ClusterIndexSequence> test_clusters;
  GanResult softmax;
  GanResult gumbel;
};

// Seeds: K-means uses Rng(seed).Derive("kmeans").Derive(k), the GAN runs
// Rng(seed).Derive("gan-softmax" / "gan-gumbel").Derive(k). Throws
// std::logic_error if an accuracy exceeds the purity of its split.
SweepPointResult SweepPoint(std::size_t k, const EmbeddedCorpus &train,
                            const EmbeddedCorpus &test,
                            std::span<const std::vector<int>> text,
                            std::size_t num_phonemes, const SweepConfig &config);

// One row per K, in the order given. Points run on up to config.jobs
// threads; the result does not depend on the thread count.
std::vector<SweepRow> SweepClusters(std::span<const std::size_t> ks,
                                    const EmbeddedCorpus &train,
                                    const EmbeddedCorpus &test,
                                    std::span<const std::vector<int>> text,
                                    std::size_t num_phonemes,
                                    const SweepConfig &config);

// Header k,purity_train,purity_test,acc_softmax_train,acc_softmax_test,
// acc_gumbel_train,acc_gumbel_test. Modes that were not run are empty.
void WriteSweepCsv(std::ostream &os, std::span<const SweepRow> rows);

// Throws std::logic_error naming the row when an accuracy exceeds purity.
void CheckSweepRow(const SweepRow &row);

}  // namespace phonegan

#endif  // PHONEGAN_EVAL_SWEEP_H_

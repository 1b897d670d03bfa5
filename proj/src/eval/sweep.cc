// eval/sweep.cc
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

#include "phonegan/eval/sweep.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "phonegan/eval/metrics.h"

namespace phonegan {

namespace {

double SplitAccuracy(const LookupTable &table,
                     std::span<const ClusterIndexSequence> clusters,
                     std::span<const int> labels) {
  std::vector<int> pred;
  pred.reserve(labels.size());
  for (const auto &seq : clusters) {
    const std::vector<int> d = Decode(seq.indices, table);
    pred.insert(pred.end(), d.begin(), d.end());
  }
  return PhonemeAccuracy(pred, labels);
}

std::uint64_t PointSeed(std::uint64_t root, const char *stream,
                        std::size_t k) {
  return Rng(root).Derive(stream).Derive(static_cast<std::uint64_t>(k)).seed();
}

}  // namespace

void EmbeddedCorpus::Validate() const {
  if (offsets.size() != ids.size() + 1 || offsets.front() != 0 ||
      offsets.back() != embeddings.dim(0)) {
    throw std::invalid_argument("embedded corpus: offsets do not cover rows");
  }
  for (std::size_t u = 0; u < ids.size(); ++u) {
    if (offsets[u + 1] <= offsets[u]) {
      throw std::invalid_argument("embedded corpus: utterance " + ids[u] +
                                  " has no segments");
    }
  }
  if (!labels.empty() && labels.size() != embeddings.dim(0)) {
    throw std::invalid_argument("embedded corpus: one label per row required");
  }
}

std::vector<ClusterIndexSequence> ToClusterSequences(
    const EmbeddedCorpus &corpus, std::span<const int> assignment) {
  if (assignment.size() != corpus.embeddings.dim(0)) {
    throw std::invalid_argument("cluster sequences: assignment length " +
                                std::to_string(assignment.size()) + " vs " +
                                std::to_string(corpus.embeddings.dim(0)) +
                                " rows");
  }
  std::vector<ClusterIndexSequence> out;
  out.reserve(corpus.num_utterances());
  for (std::size_t u = 0; u < corpus.num_utterances(); ++u) {
    out.push_back({corpus.ids[u],
                   std::vector<int>(assignment.begin() + corpus.offsets[u],
                                    assignment.begin() + corpus.offsets[u + 1])});
  }
  return out;
}

void CheckSweepRow(const SweepRow &row) {
  auto check = [&](double acc, double purity, const char *what) {
    if (acc >= 0.0 && acc > purity) {
      throw std::logic_error("sweep: " + std::string(what) + " accuracy " +
                             std::to_string(acc) + " exceeds purity " +
                             std::to_string(purity) + " at k=" +
                             std::to_string(row.k));
    }
  };
  check(row.acc_softmax_train, row.purity_train, "softmax train");
  check(row.acc_gumbel_train, row.purity_train, "gumbel train");
  check(row.acc_softmax_test, row.purity_test, "softmax test");
  check(row.acc_gumbel_test, row.purity_test, "gumbel test");
}

SweepPointResult SweepPoint(std::size_t k, const EmbeddedCorpus &train,
                            const EmbeddedCorpus &test,
                            std::span<const std::vector<int>> text,
                            std::size_t num_phonemes,
                            const SweepConfig &config) {
  train.Validate();
  if (train.labels.empty()) {
    throw std::invalid_argument("sweep: training corpus needs labels");
  }
  const bool has_test = test.num_utterances() > 0;
  if (has_test) {
    test.Validate();
    if (test.labels.empty()) {
      throw std::invalid_argument("sweep: test corpus needs labels");
    }
  }
  SweepPointResult out;
  out.row.k = k;
  KMeansConfig kc = config.kmeans;
  kc.k = k;
  kc.seed = PointSeed(config.seed, "kmeans", k);
  out.codebook = KMeansFit(train.embeddings, kc).codebook;
  auto points = [&](const Tensor &x) {
    return kc.normalize ? L2Normalize(x) : x;
  };
  const std::vector<int> train_idx =
      Assign(points(train.embeddings), out.codebook);
  out.train_clusters = ToClusterSequences(train, train_idx);
  out.row.purity_train = Purity(train_idx, train.labels);
  if (has_test) {
    const std::vector<int> test_idx = Assign(points(test.embeddings), out.codebook);
    out.test_clusters = ToClusterSequences(test, test_idx);
    out.row.purity_test = Purity(test_idx, test.labels);
  } else {
    out.row.purity_test = -1.0;
  }

  auto run = [&](GeneratorMode mode, const char *stream, GanResult &result,
                 double &acc_train, double &acc_test) {
    GanConfig gc = config.gan;
    gc.mode = mode;
    gc.seed = PointSeed(config.seed, stream, k);
    result = TrainGan(out.train_clusters, text, k, num_phonemes, gc);
    acc_train = SplitAccuracy(result.table, out.train_clusters, train.labels);
    if (has_test) {
      acc_test = SplitAccuracy(result.table, out.test_clusters, test.labels);
    }
  };
  if (config.run_softmax) {
    run(GeneratorMode::kSoftmax, "gan-softmax", out.softmax,
        out.row.acc_softmax_train, out.row.acc_softmax_test);
  }
  if (config.run_gumbel) {
    run(GeneratorMode::kGumbel, "gan-gumbel", out.gumbel,
        out.row.acc_gumbel_train, out.row.acc_gumbel_test);
  }
  CheckSweepRow(out.row);
  return out;
}

std::vector<SweepRow> SweepClusters(std::span<const std::size_t> ks,
                                    const EmbeddedCorpus &train,
                                    const EmbeddedCorpus &test,
                                    std::span<const std::vector<int>> text,
                                    std::size_t num_phonemes,
                                    const SweepConfig &config) {
  if (ks.empty()) throw std::invalid_argument("sweep: no cluster counts");
  std::vector<SweepRow> rows(ks.size());
  std::vector<std::exception_ptr> errors(ks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < ks.size(); i = next++) {
      try {
        rows[i] =
            SweepPoint(ks[i], train, test, text, num_phonemes, config).row;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(
      config.jobs < 1 ? 1 : static_cast<std::size_t>(config.jobs), 1,
      ks.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto &t : threads) t.join();
  }
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void WriteSweepCsv(std::ostream &os, std::span<const SweepRow> rows) {
  os << "k,purity_train,purity_test,acc_softmax_train,acc_softmax_test,"
        "acc_gumbel_train,acc_gumbel_test\n";
  os << std::setprecision(10);
  auto cell = [&](double v) {
    os << ',';
    if (v >= 0.0) os << v;
  };
  for (const auto &r : rows) {
    CheckSweepRow(r);
    os << r.k;
    cell(r.purity_train);
    cell(r.purity_test);
    cell(r.acc_softmax_train);
    cell(r.acc_softmax_test);
    cell(r.acc_gumbel_train);
    cell(r.acc_gumbel_test);
    os << '\n';
  }
}

}  // namespace phonegan

// eval/supervised.cc
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


#include "phonegan/eval/supervised.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "phonegan/numcore/error.h"

namespace phonegan {

namespace {

struct Classifier {
  LstmLayer lstm;
  Parameter w;  // hidden x L
  Parameter b;  // L

  Classifier(std::size_t dim, std::size_t hidden, std::size_t classes)
      : lstm(dim, hidden), w(Tensor({hidden, classes})), b(Tensor({classes})) {}

  std::vector<Parameter *> parameters() {
    std::vector<Parameter *> out = lstm.parameters();
    out.push_back(&w);
    out.push_back(&b);
    return out;
  }
};

struct Batch {
  std::vector<std::size_t> lengths;
  std::vector<Tensor> inputs;
  std::vector<int> labels;
};

Batch MakeBatch(const LabeledSegments &data, std::span<const std::size_t> ids,
                std::size_t dim) {
  Batch b;
  std::size_t steps = 0;
  for (std::size_t i : ids) {
    const Tensor &s = data.segments[i];
    if (s.rank() != 2 || s.dim(1) != dim || s.dim(0) == 0) {
      throw ShapeError("supervised: segment " + std::to_string(i) +
                       " has shape " + ShapeToString(s.shape()));
    }
    b.lengths.push_back(s.dim(0));
    b.labels.push_back(data.labels[i]);
    steps = std::max(steps, s.dim(0));
  }
  b.inputs.assign(steps, Tensor({ids.size(), dim}));
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const Tensor &s = data.segments[ids[r]];
    for (std::size_t t = 0; t < s.dim(0); ++t) {
      b.inputs[t].matrix().row(r) = s.matrix().row(t);
    }
  }
  return b;
}

std::vector<Batch> Bucket(const LabeledSegments &data,
                          std::vector<std::size_t> ids, std::size_t batch,
                          std::size_t dim) {
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
    return data.segments[a].dim(0) < data.segments[b].dim(0);
  });
  std::vector<Batch> out;
  for (std::size_t i = 0; i < ids.size(); i += batch) {
    const std::size_t n = std::min(batch, ids.size() - i);
    out.push_back(MakeBatch(data, std::span(ids).subspan(i, n), dim));
  }
  return out;
}

// Returns the number of correct predictions; with `train`, accumulates the
// mean cross-entropy gradient.
std::size_t RunBatch(Classifier &model, const Batch &b, bool train) {
  const std::size_t rows = b.lengths.size();
  const std::size_t hidden = model.lstm.hidden_dim();
  const std::size_t classes = model.b.value.size();
  const LstmParams p = model.lstm.View();
  const Tensor zeros({rows, hidden});
  const LstmSequenceCache run = LstmForward(p, b.inputs, b.lengths, zeros, zeros);
  const Tensor &h = run.h.back();
  RowMatrix a = h.matrix().cwiseMax(0.0);
  RowMatrix logits = a * model.w.value.matrix();
  logits.rowwise() += model.b.value.vector().transpose();

  std::size_t correct = 0;
  RowMatrix dlogits(rows, classes);
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> row(logits.row(r).data(), classes);
    if (Argmax(row) == static_cast<std::size_t>(b.labels[r])) ++correct;
    if (train) {
      const CrossEntropyResult ce =
          SoftmaxCrossEntropy(row, static_cast<std::size_t>(b.labels[r]));
      for (std::size_t c = 0; c < classes; ++c) {
        dlogits(r, c) = ce.dlogits[c] / static_cast<double>(rows);
      }
    }
  }
  if (!train) return correct;
  model.w.grad.matrix().noalias() += a.transpose() * dlogits;
  model.b.grad.vector() += dlogits.colwise().sum().transpose();
  Tensor dh({rows, hidden});
  dh.matrix() = (dlogits * model.w.value.matrix().transpose()).cwiseProduct(
      (h.matrix().array() > 0.0).cast<double>().matrix());
  LstmParams grads(p.input_dim(), hidden);
  LstmBackward(p, run, {}, dh, zeros, grads);
  model.lstm.AddGrads(grads);
  return correct;
}

void CheckData(const LabeledSegments &d, std::size_t num_phonemes,
               const char *what) {
  if (d.segments.size() != d.labels.size()) {
    throw std::invalid_argument(std::string("supervised: ") + what +
                                " segment and label counts differ");
  }
  if (d.segments.empty()) {
    throw std::invalid_argument(std::string("supervised: empty ") + what +
                                " set");
  }
  for (int l : d.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= num_phonemes) {
      throw std::invalid_argument(std::string("supervised: ") + what +
                                  " label " + std::to_string(l) +
                                  " out of range");
    }
  }
}

}  // namespace

SupervisedResult SupervisedBaseline(const LabeledSegments &train,
                                    const LabeledSegments &test,
                                    double fraction, std::size_t num_phonemes,
                                    const SupervisedConfig &config) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("supervised: fraction must be in (0, 1], got " +
                                std::to_string(fraction));
  }
  if (config.hidden < 1 || config.batch < 1 || !(config.lr > 0.0) ||
      config.epochs < 0) {
    throw std::invalid_argument("supervised config: sizes and lr must be positive");
  }
  CheckData(train, num_phonemes, "train");
  CheckData(test, num_phonemes, "test");
  const std::size_t dim = train.segments.front().dim(1);

  Rng root(config.seed);
  Rng subset_rng = root.Derive("subset");
  Rng init_rng = root.Derive("init");
  Rng order_rng = root.Derive("order");

  std::vector<std::size_t> ids(train.segments.size());
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[subset_rng.UniformInt(i)]);
  }
  const auto take = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(fraction * static_cast<double>(ids.size()) - 1e-9)));
  ids.resize(std::min(take, ids.size()));

  SupervisedResult result;
  result.train_used = ids.size();
  std::vector<std::size_t> per_class(num_phonemes, 0);
  for (std::size_t i : ids) ++per_class[static_cast<std::size_t>(train.labels[i])];
  for (std::size_t c = 0; c < num_phonemes; ++c) {
    if (per_class[c] < 2) {
      result.warnings.push_back("phoneme " + std::to_string(c) + " has " +
                                std::to_string(per_class[c]) +
                                " labeled examples");
    }
  }

  Classifier model(dim, config.hidden, num_phonemes);
  model.lstm.Initialize(init_rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  for (double &v : model.w.value.data()) v = init_rng.Uniform(-bound, bound);

  std::vector<Batch> batches = Bucket(train, ids, config.batch, dim);
  Adam opt(model.parameters(), config.lr, config.adam);
  std::vector<std::size_t> order(batches.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[order_rng.UniformInt(i)]);
    }
    for (std::size_t bi : order) {
      opt.ZeroGrad();
      RunBatch(model, batches[bi], true);
      try {
        opt.Step();
      } catch (const NonFiniteError &) {
        throw DivergenceError("supervised training: non-finite gradient", epoch);
      }
    }
  }

  std::size_t correct = 0;
  for (const Batch &b : batches) correct += RunBatch(model, b, false);
  result.train_accuracy =
      static_cast<double>(correct) / static_cast<double>(ids.size());
  std::vector<std::size_t> all(test.segments.size());
  std::iota(all.begin(), all.end(), 0);
  correct = 0;
  for (const Batch &b : Bucket(test, all, config.batch, dim)) {
    correct += RunBatch(model, b, false);
  }
  result.test_accuracy =
      static_cast<double>(correct) / static_cast<double>(all.size());
  return result;
}

}  // namespace phonegan

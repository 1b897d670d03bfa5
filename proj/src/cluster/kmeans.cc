// cluster/kmeans.cc
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

#include "phonegan/cluster/kmeans.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "phonegan/numcore/error.h"
#include "phonegan/numcore/rng.h"

namespace phonegan {

namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Index of the nearest centroid (0-based) and its squared distance.
std::pair<std::size_t, double> Nearest(std::span<const double> point,
                                       const Tensor &centroids) {
  std::size_t best = 0;
  double best_d = SquaredDistance(point, centroids.row(0));
  for (std::size_t k = 1; k < centroids.dim(0); ++k) {
    const double d = SquaredDistance(point, centroids.row(k));
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return {best, best_d};
}

Tensor SeedPlusPlus(const Tensor &points, std::size_t k, Rng &rng) {
  const std::size_t n = points.dim(0);
  const std::size_t d = points.dim(1);
  Tensor centroids({k, d});
  std::vector<double> dist(n);
  std::size_t first = static_cast<std::size_t>(rng.UniformInt(n));
  std::copy_n(points.row(first).begin(), d, centroids.row(0).begin());
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = SquaredDistance(points.row(i), centroids.row(0));
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : dist) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.Uniform() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist[i];
        if (acc > target && dist[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // All points coincide with a chosen centroid; duplicates are allowed
      // and get repaired (or stay identical) during Lloyd iterations.
      pick = static_cast<std::size_t>(rng.UniformInt(n));
    }
    std::copy_n(points.row(pick).begin(), d, centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i],
                         SquaredDistance(points.row(i), centroids.row(c)));
    }
  }
  return centroids;
}

}  // namespace

Tensor L2Normalize(const Tensor &points) {
  Tensor out = points;
  for (std::size_t i = 0; i < out.dim(0); ++i) {
    auto r = out.row(i);
    double norm = 0.0;
    for (double v : r) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double &v : r) v /= norm;
    }
  }
  return out;
}

KMeansResult KMeansFit(const Tensor &input, const KMeansConfig &config) {
  if (input.rank() != 2) {
    throw ShapeError("kmeans: embeddings must be N x d, got " +
                     ShapeToString(input.shape()));
  }
  if (config.k < 1) throw std::invalid_argument("kmeans: K must be >= 1");
  const std::size_t n = input.dim(0);
  const std::size_t d = input.dim(1);
  if (n < config.k) {
    throw std::invalid_argument("kmeans: need N >= K, got N=" +
                                std::to_string(n) +
                                " K=" + std::to_string(config.k));
  }
  if (!input.AllFinite()) {
    throw NonFiniteError("kmeans: embeddings contain non-finite values");
  }
  const Tensor points = config.normalize ? L2Normalize(input) : input;
  const std::size_t k = config.k;

  Rng rng = Rng(config.seed).Derive("kmeans++");
  KMeansResult result;
  Tensor centroids = SeedPlusPlus(points, k, rng);
  std::vector<std::size_t> assignment(n);
  std::vector<double> point_dist(n);

  for (int iter = 0; iter < config.max_iter; ++iter) {
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [c, dist] = Nearest(points.row(i), centroids);
      assignment[i] = c;
      point_dist[i] = dist;
      wcss += dist;
    }
    result.wcss.push_back(wcss);
    result.iterations = iter + 1;

    Tensor sums({k, d});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sums.row(assignment[i]);
      auto src = points.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      ++counts[assignment[i]];
    }
    // Empty clusters take the point currently farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (point_dist[i] > point_dist[far]) far = i;
      }
      const std::size_t donor = assignment[far];
      if (counts[donor] <= 1) continue;
      auto src = points.row(far);
      auto donor_sum = sums.row(donor);
      for (std::size_t j = 0; j < d; ++j) donor_sum[j] -= src[j];
      --counts[donor];
      std::copy(src.begin(), src.end(), sums.row(c).begin());
      counts[c] = 1;
      assignment[far] = c;
      point_dist[far] = 0.0;
      ++result.empty_repairs;
    }

    double max_move = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = centroids.row(c);
      auto s = sums.row(c);
      double move = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = s[j] / static_cast<double>(counts[c]);
        move += (v - dst[j]) * (v - dst[j]);
        dst[j] = v;
      }
      max_move = std::max(max_move, std::sqrt(move));
    }
    if (max_move < config.tol) break;
  }
  result.codebook.centroids = std::move(centroids);
  return result;
}

int AssignOne(std::span<const double> point, const Codebook &codebook) {
  if (point.size() != codebook.dim()) {
    throw ShapeError("assign: embedding has dim " +
                     std::to_string(point.size()) + ", codebook has " +
                     std::to_string(codebook.dim()));
  }
  return static_cast<int>(Nearest(point, codebook.centroids).first) + 1;
}

std::vector<int> Assign(const Tensor &points, const Codebook &codebook) {
  if (points.rank() != 2 || points.dim(1) != codebook.dim()) {
    throw ShapeError("assign: embeddings " + ShapeToString(points.shape()) +
                     " do not match codebook dim " +
                     std::to_string(codebook.dim()));
  }
  std::vector<int> out(points.dim(0));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = AssignOne(points.row(i), codebook);
  }
  return out;
}

double Wcss(const Tensor &points, const Codebook &codebook) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.dim(0); ++i) {
    total += Nearest(points.row(i), codebook.centroids).second;
  }
  return total;
}

double Purity(std::span<const int> indices, std::span<const int> labels) {
  if (indices.size() != labels.size()) {
    throw std::invalid_argument("purity: " + std::to_string(indices.size()) +
                                " indices vs " +
                                std::to_string(labels.size()) + " labels");
  }
  if (indices.empty()) throw std::invalid_argument("purity: empty input");
  std::map<int, std::map<int, long>> histogram;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    ++histogram[indices[i]][labels[i]];
  }
  long majority = 0;
  for (const auto &[cluster, counts] : histogram) {
    long best = 0;
    for (const auto &[label, count] : counts) best = std::max(best, count);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(indices.size());
}

}  // namespace phonegan

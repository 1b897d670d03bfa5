// phonegan/cluster/kmeans.h
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

#ifndef PHONEGAN_CLUSTER_KMEANS_H_
#define PHONEGAN_CLUSTER_KMEANS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phonegan/numcore/tensor.h"

namespace phonegan {

// Cluster ids are 1-based: every index lies in [1, K].
struct ClusterIndexSequence {
  std::string id;
  std::vector<int> indices;
};

struct Codebook {
  Tensor centroids;  // K x d

  std::size_t k() const { return centroids.dim(0); }
  std::size_t dim() const { return centroids.dim(1); }
};

struct KMeansConfig {
  std::size_t k = 50;
  std::uint64_t seed = 0;
  int max_iter = 300;
  double tol = 1e-6;  // max centroid movement (Euclidean)
  bool normalize = false;  // L2-normalize embeddings before fitting
};

struct KMeansResult {
  Codebook codebook;
  // Within-cluster sum of squares after each assignment step.
  std::vector<double> wcss;
  int iterations = 0;
  int empty_repairs = 0;
};

// k-means++ seeding followed by Lloyd iterations. `points` is N x d.
KMeansResult KMeansFit(const Tensor &points, const KMeansConfig &config);

// Nearest centroid per row of `points`, 1-based; ties go to the lowest id.
std::vector<int> Assign(const Tensor &points, const Codebook &codebook);
int AssignOne(std::span<const double> point, const Codebook &codebook);

double Wcss(const Tensor &points, const Codebook &codebook);

// Rows scaled to unit L2 norm (zero rows left as is).
Tensor L2Normalize(const Tensor &points);

// Fraction of points whose label equals the modal label of their cluster.
// `indices` and `labels` are parallel; cluster ids are any positive ints.
double Purity(std::span<const int> indices, std::span<const int> labels);

}  // namespace phonegan

#endif  // PHONEGAN_CLUSTER_KMEANS_H_

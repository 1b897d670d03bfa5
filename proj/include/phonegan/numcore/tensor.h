// phonegan/numcore/tensor.h
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

#ifndef PHONEGAN_NUMCORE_TENSOR_H_
#define PHONEGAN_NUMCORE_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace phonegan {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

using Shape = std::vector<std::size_t>;
// Packet-aligned so Eigen reductions do not depend on the heap address.
using Storage = std::vector<double, Eigen::aligned_allocator<double>>;

std::string ShapeToString(const Shape &shape);

// Dense row-major tensor of doubles. Rank 0 is not used; scalars are
// rank-1 tensors of length one.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor ZerosLike(const Tensor &other) { return Tensor(other.shape_); }
  static Tensor FromVector(std::vector<double> data);

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  Storage &values() { return data_; }
  const Storage &values() const { return data_; }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double &at(std::size_t i, std::size_t j) {
    return data_[i * shape_[1] + j];
  }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double &at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;

  // Rank-2 views. Rank-3 tensors are viewed as (dim0*dim1) x dim2.
  MatrixMap matrix();
  ConstMatrixMap matrix() const;
  VectorMap vector() { return VectorMap(data_.data(), data_.size()); }
  ConstVectorMap vector() const {
    return ConstVectorMap(data_.data(), data_.size());
  }

  void Fill(double value);
  void SetZero() { Fill(0.0); }
  void Reshape(Shape shape);
  bool AllFinite() const;
  bool SameShape(const Tensor &other) const { return shape_ == other.shape_; }

  Tensor &operator+=(const Tensor &other);
  Tensor &operator*=(double scale);

 private:
  Shape shape_;
  Storage data_;
};

// Throws ShapeError naming `what` when the shapes differ.
void CheckShape(const Tensor &t, const Shape &expected, const char *what);

}  // namespace phonegan

#endif  // PHONEGAN_NUMCORE_TENSOR_H_

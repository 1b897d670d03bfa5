// numcore/tensor.cc
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

#include "phonegan/numcore/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "phonegan/numcore/error.h"

namespace phonegan {

namespace {

std::size_t NumElements(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace

std::string ShapeToString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  if (NumElements(shape_) != data_.size()) {
    throw ShapeError("tensor of shape " + ShapeToString(shape_) + " given " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::FromVector(std::vector<double> data) {
  const std::size_t n = data.size();
  return Tensor({n}, std::move(data));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     ShapeToString(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t cols = shape_.back();
  return std::span<double>(data_).subspan(i * cols, cols);
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t cols = shape_.back();
  return std::span<const double>(data_).subspan(i * cols, cols);
}

MatrixMap Tensor::matrix() {
  const std::size_t cols = shape_.empty() ? 0 : shape_.back();
  const std::size_t rows = cols == 0 ? 0 : data_.size() / cols;
  return MatrixMap(data_.data(), rows, cols);
}

ConstMatrixMap Tensor::matrix() const {
  const std::size_t cols = shape_.empty() ? 0 : shape_.back();
  const std::size_t rows = cols == 0 ? 0 : data_.size() / cols;
  return ConstMatrixMap(data_.data(), rows, cols);
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::Reshape(Shape shape) {
  if (NumElements(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + ShapeToString(shape_) + " to " +
                     ShapeToString(shape));
  }
  shape_ = std::move(shape);
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor &Tensor::operator+=(const Tensor &other) {
  CheckShape(other, shape_, "tensor +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor &Tensor::operator*=(double scale) {
  for (double &v : data_) v *= scale;
  return *this;
}

void CheckShape(const Tensor &t, const Shape &expected, const char *what) {
  if (t.shape() != expected) {
    throw ShapeError(std::string(what) + ": expected shape " +
                     ShapeToString(expected) + ", got " +
                     ShapeToString(t.shape()));
  }
}

}  // namespace phonegan

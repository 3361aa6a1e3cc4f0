#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "pedk/error.hpp"

namespace pedk::nn {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Shape = std::vector<Index>;

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

inline Index element_count(const Shape& shape) {
  Index n = 1;
  for (Index d : shape) n *= d;
  return n;
}

// Dense row-major n-dimensional array. Storage is an Eigen vector so slices
// can be mapped as matrices without copying.
template <typename Scalar>
class Tensor {
 public:
  using MatrixMap = Eigen::Map<MatrixX<Scalar>>;
  using ConstMatrixMap = Eigen::Map<const MatrixX<Scalar>>;

  Tensor() = default;

  explicit Tensor(Shape shape, Scalar fill = Scalar(0)) : shape_(std::move(shape)) {
    check_shape();
    data_ = VectorX<Scalar>::Constant(element_count(shape_), fill);
  }

  Tensor(Shape shape, VectorX<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape();
    if (data_.size() != element_count(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                       to_string(shape_));
    }
  }

  Tensor(Shape shape, std::initializer_list<Scalar> values) : shape_(std::move(shape)) {
    check_shape();
    if (static_cast<Index>(values.size()) != element_count(shape_)) {
      throw ShapeError("initializer length does not match shape " + to_string(shape_));
    }
    data_.resize(static_cast<Index>(values.size()));
    Index i = 0;
    for (Scalar v : values) data_[i++] = v;
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index dim(std::size_t i) const { return shape_.at(i); }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  VectorX<Scalar>& data() { return data_; }
  const VectorX<Scalar>& data() const { return data_; }
  Scalar* raw() { return data_.data(); }
  const Scalar* raw() const { return data_.data(); }

  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  // Rank-3 [C,H,W] access.
  Scalar& operator()(Index c, Index y, Index x) { return data_[(c * shape_[1] + y) * shape_[2] + x]; }
  Scalar operator()(Index c, Index y, Index x) const { return data_[(c * shape_[1] + y) * shape_[2] + x]; }

  MatrixMap matrix(Index rows, Index cols) {
    if (rows * cols != size()) throw ShapeError("matrix view does not cover tensor " + to_string(shape_));
    return MatrixMap(data_.data(), rows, cols);
  }
  ConstMatrixMap matrix(Index rows, Index cols) const {
    if (rows * cols != size()) throw ShapeError("matrix view does not cover tensor " + to_string(shape_));
    return ConstMatrixMap(data_.data(), rows, cols);
  }

  Tensor reshaped(Shape shape) const {
    if (element_count(shape) != size()) {
      throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    }
    return Tensor(std::move(shape), data_);
  }

  template <typename Other>
  Tensor<Other> cast() const {
    return Tensor<Other>(shape_, data_.template cast<Other>().eval());
  }

  bool all_finite() const { return data_.allFinite(); }

  void set_zero() { data_.setZero(); }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  void check_shape() const {
    for (Index d : shape_) {
      if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape_));
    }
  }

  Shape shape_;
  VectorX<Scalar> data_;
};

}  // namespace pedk::nn

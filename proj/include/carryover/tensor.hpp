#pragma once

#include <Eigen/Core>
#include <initializer_list>
#include <vector>

#include "carryover/errors.hpp"

namespace carryover {

using Index = Eigen::Index;
using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense tensor of 64-bit reals, row-major, rank 0..2.
///
/// Rank 0 is a scalar, rank 1 a vector, rank 2 a matrix. Storage is a flat
/// Eigen vector; matrix views are provided through Eigen maps so all numeric
/// work stays inside Eigen expressions.
class Tensor {
 public:
  Tensor() : shape_{}, data_(1) { data_[0] = 0.0; }

  explicit Tensor(std::vector<Index> shape)
      : shape_(std::move(shape)), data_(count(shape_)) {
    data_.setZero();
  }

  static Tensor scalar(double v) {
    Tensor t;
    t.data_[0] = v;
    return t;
  }

  static Tensor vector(std::initializer_list<double> xs) {
    Tensor t({static_cast<Index>(xs.size())});
    Index i = 0;
    for (double x : xs) t.data_[i++] = x;
    return t;
  }

  static Tensor from_vector(const Eigen::VectorXd& v) {
    Tensor t({v.size()});
    t.data_ = v;
    return t;
  }

  static Tensor from_matrix(const RowMatrixXd& m) {
    Tensor t({m.rows(), m.cols()});
    Eigen::Map<RowMatrixXd>(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<Index>& shape() const { return shape_; }
  Index size() const { return data_.size(); }
  Index dim(int axis) const { return shape_.at(axis); }

  bool is_scalar() const { return shape_.empty(); }
  double value() const {
    if (!is_scalar()) throw ShapeMismatch("Tensor::value on non-scalar");
    return data_[0];
  }

  Index rows() const {
    if (rank() != 2) throw ShapeMismatch("Tensor::rows on non-matrix");
    return shape_[0];
  }
  Index cols() const {
    if (rank() != 2) throw ShapeMismatch("Tensor::cols on non-matrix");
    return shape_[1];
  }

  double& operator[](Index i) { return data_[i]; }
  double operator[](Index i) const { return data_[i]; }
  double& at(Index r, Index c) { return data_[r * cols() + c]; }
  double at(Index r, Index c) const { return data_[r * cols() + c]; }

  Eigen::VectorXd& flat() { return data_; }
  const Eigen::VectorXd& flat() const { return data_; }

  Eigen::Map<RowMatrixXd> mat() {
    return Eigen::Map<RowMatrixXd>(data_.data(), rows(), cols());
  }
  Eigen::Map<const RowMatrixXd> mat() const {
    return Eigen::Map<const RowMatrixXd>(data_.data(), rows(), cols());
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  bool all_finite() const { return data_.allFinite(); }

  void set_zero() { data_.setZero(); }

  Tensor zeros_like() const { return Tensor(shape_); }

 private:
  static Index count(const std::vector<Index>& shape) {
    Index n = 1;
    for (Index d : shape) {
      if (d <= 0) throw ShapeMismatch("non-positive dimension");
      n *= d;
    }
    return n;
  }

  std::vector<Index> shape_;
  Eigen::VectorXd data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("tensor shapes differ");
}

}  // namespace carryover

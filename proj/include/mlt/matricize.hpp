#pragma once

#include "mlt/products.hpp"

#include <Eigen/Core>

namespace mlt {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Shape row_shape(const Tensor<Scalar>& a, ModePartition p) {
  detail::require_partition(a, p);
  return Shape(a.shape().begin(), a.shape().begin() + p.n_row);
}

template <typename Scalar>
Shape col_shape(const Tensor<Scalar>& a, ModePartition p) {
  detail::require_partition(a, p);
  return Shape(a.shape().begin() + p.n_row, a.shape().end());
}

/// Unfolds a into the (prod row dims) x (prod col dims) matrix. Row index of
/// element (i_1..i_N, j_1..j_M) is i_1 + sum (i_k - 1) prod_{l<k} I_l and the
/// column index is built the same way from the j's. Under the storage layout
/// this is a pure reshape.
template <typename Scalar>
Tensor<Scalar> unfold(const Tensor<Scalar>& a, ModePartition p) {
  const Index rows = shape_size(row_shape(a, p));
  return a.reshaped(Shape{rows, a.size() / rows});
}

/// Moving overload: reuses the buffer, O(1).
template <typename Scalar>
Tensor<Scalar> unfold(Tensor<Scalar>&& a, ModePartition p) {
  const Index rows = shape_size(row_shape(a, p));
  const Index cols = a.size() / rows;
  return std::move(a).reshaped(Shape{rows, cols});
}

namespace detail {
template <typename Scalar>
void require_fold(const Tensor<Scalar>& m, const Shape& rows, const Shape& cols) {
  if (m.order() != 2 || m.shape()[0] != shape_size(rows) || m.shape()[1] != shape_size(cols))
    throw ShapeError("cannot fold " + to_string(m.shape()) + " into " + to_string(rows) + "|" + to_string(cols));
}
}  // namespace detail

/// Inverse of unfold.
template <typename Scalar>
Tensor<Scalar> fold(const Tensor<Scalar>& m, const Shape& rows, const Shape& cols) {
  detail::require_fold(m, rows, cols);
  return m.reshaped(detail::concat(rows, cols));
}

template <typename Scalar>
Tensor<Scalar> fold(Tensor<Scalar>&& m, const Shape& rows, const Shape& cols) {
  detail::require_fold(m, rows, cols);
  return std::move(m).reshaped(detail::concat(rows, cols));
}

/// Zero-copy Eigen view of the unfolding.
template <typename Scalar>
Eigen::Map<const Matrix<Scalar>> matrix_view(const Tensor<Scalar>& a, ModePartition p) {
  const Index rows = shape_size(row_shape(a, p));
  return {a.data().data(), rows, a.size() / rows};
}

template <typename Scalar>
Eigen::Map<Matrix<Scalar>> matrix_view(Tensor<Scalar>& a, ModePartition p) {
  const Index rows = shape_size(row_shape(a, p));
  return {a.data().data(), rows, a.size() / rows};
}

/// Folds an Eigen matrix into a tensor with the given row and column shapes.
template <typename Derived>
Tensor<typename Derived::Scalar> fold_matrix(const Eigen::MatrixBase<Derived>& m, const Shape& rows, const Shape& cols) {
  using Scalar = typename Derived::Scalar;
  if (m.rows() != shape_size(rows) || m.cols() != shape_size(cols))
    throw ShapeError("cannot fold " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + " matrix into " +
                     to_string(rows) + "|" + to_string(cols));
  Tensor<Scalar> out(detail::concat(rows, cols));
  Eigen::Map<Matrix<Scalar>>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

/// Copies a matrix-shaped tensor into an Eigen matrix.
template <typename Scalar>
Matrix<Scalar> to_matrix(const Tensor<Scalar>& m) {
  if (m.order() != 2) throw ShapeError("expected a matrix-shaped tensor, got " + to_string(m.shape()));
  return Eigen::Map<const Matrix<Scalar>>(m.data().data(), m.shape()[0], m.shape()[1]);
}

template <typename Derived>
Tensor<typename Derived::Scalar> from_matrix(const Eigen::MatrixBase<Derived>& m) {
  return fold_matrix(m, Shape{m.rows()}, Shape{m.cols()});
}

}  // namespace mlt

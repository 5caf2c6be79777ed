#pragma once

#include "mlt/matricize.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace mlt {

// All routines here unfold their operand, run a dense matrix kernel and fold
// the factors back. Einstein products of the folded factors reproduce the
// matrix products of the kernel, so the tensor identities follow from the
// matrix ones.

template <typename Scalar>
struct TensorSvd {
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  Tensor<Scalar> u;  ///< unitary, row shape x row shape
  Tensor<Scalar> d;  ///< pseudo-diagonal, row shape x col shape
  Tensor<Scalar> v;  ///< unitary, col shape x col shape
  std::vector<RealScalar> singular_values;  ///< non-increasing
  ModePartition partition;
};

template <typename Scalar>
struct TensorEvd {
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  Tensor<Scalar> u;
  Tensor<Scalar> d;
  std::vector<RealScalar> eigenvalues;  ///< non-increasing

  /// k-th eigentensor (0-based), an order-N tensor over the row shape.
  Tensor<Scalar> eigentensor(Index k) const {
    const auto n = static_cast<Index>(eigenvalues.size());
    Shape rows(u.shape().begin(), u.shape().begin() + u.order() / 2);
    Tensor<Scalar> x(rows);
    for (Index i = 0; i < n; ++i) x[i] = u[i + n * k];
    return x;
  }
};

template <typename Scalar>
struct TensorLu {
  Tensor<Scalar> l;  ///< pseudo-lower triangular, unit pseudo-diagonal
  Tensor<Scalar> u;  ///< pseudo-upper triangular
};

namespace detail {

template <typename Scalar>
Index require_square(const Tensor<Scalar>& a, const char* what) {
  if (!is_square(a)) throw ShapeError(std::string(what) + " needs a square tensor, got " + to_string(a.shape()));
  return shape_size(std::span<const Index>(a.shape().data(), static_cast<std::size_t>(a.order() / 2)));
}

template <typename Scalar>
Shape half_shape(const Tensor<Scalar>& a) {
  return Shape(a.shape().begin(), a.shape().begin() + a.order() / 2);
}

/// Scales every column so that its largest-magnitude entry (first one on
/// ties) is real and positive; applies the same factor to `partner` columns.
template <typename Scalar>
void fix_phases(Matrix<Scalar>& m, Matrix<Scalar>* partner, Index n_partner) {
  for (Index k = 0; k < m.cols(); ++k) {
    Index best = 0;
    typename Eigen::NumTraits<Scalar>::Real best_mag = -1;
    for (Index i = 0; i < m.rows(); ++i) {
      const auto mag = std::abs(m(i, k));
      if (mag > best_mag) {
        best_mag = mag;
        best = i;
      }
    }
    if (best_mag <= 0) continue;
    const Scalar phase = detail::conj(m(best, k)) / static_cast<Scalar>(best_mag);
    m.col(k) *= phase;
    m(best, k) = static_cast<Scalar>(std::abs(m(best, k)));
    if (partner && k < n_partner) partner->col(k) *= phase;
  }
}

template <typename Scalar>
void require_hermitian(const Matrix<Scalar>& a, std::optional<double> tol, const char* what) {
  const double scale = a.size() ? static_cast<double>(a.cwiseAbs().maxCoeff()) : 0.0;
  const double t = tol ? *tol : 1e-12 * scale;
  if (a.rows() && static_cast<double>((a - a.adjoint()).cwiseAbs().maxCoeff()) > t)
    throw std::invalid_argument(std::string(what) + " needs a Hermitian tensor");
}

}  // namespace detail

/// SVD a = u *_N d *_M v^H for the partition N|M.
template <typename Scalar>
TensorSvd<Scalar> svd(const Tensor<Scalar>& a, ModePartition partition) {
  const Shape rows = row_shape(a, partition);
  const Shape cols = col_shape(a, partition);
  const auto mat = matrix_view(a, partition);
  Eigen::JacobiSVD<Matrix<Scalar>> solver(mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix<Scalar> u = solver.matrixU();
  Matrix<Scalar> v = solver.matrixV();
  const auto& sv = solver.singularValues();
  const Index k = sv.size();
  detail::fix_phases(u, &v, k);
  if (v.cols() > k) {
    Matrix<Scalar> tail = v.rightCols(v.cols() - k);
    detail::fix_phases<Scalar>(tail, nullptr, 0);
    v.rightCols(v.cols() - k) = tail;
  }
  Matrix<Scalar> d = Matrix<Scalar>::Zero(mat.rows(), mat.cols());
  TensorSvd<Scalar> out;
  for (Index i = 0; i < k; ++i) {
    d(i, i) = sv(i);
    out.singular_values.push_back(sv(i));
  }
  out.u = fold_matrix(u, rows, rows);
  out.d = fold_matrix(d, rows, cols);
  out.v = fold_matrix(v, cols, cols);
  out.partition = partition;
  return out;
}

template <typename Scalar>
bool is_hermitian(const Tensor<Scalar>& a, std::optional<double> tol = {}) {
  if (!is_square(a)) return false;
  try {
    detail::require_hermitian<Scalar>(matrix_view(a, ModePartition::square(a.order())), tol, "");
  } catch (const std::invalid_argument&) {
    return false;
  }
  return true;
}

/// EVD of a Hermitian square tensor, a = u *_N d *_N u^H with real
/// eigenvalues sorted descending.
template <typename Scalar>
TensorEvd<Scalar> evd_hermitian(const Tensor<Scalar>& a, std::optional<double> tol = {}) {
  detail::require_square(a, "Hermitian EVD");
  const auto p = ModePartition::square(a.order());
  const Matrix<Scalar> mat = matrix_view(a, p);
  detail::require_hermitian(mat, tol, "Hermitian EVD");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(mat);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
  const Index n = mat.rows();
  Matrix<Scalar> u = solver.eigenvectors().rowwise().reverse();
  detail::fix_phases<Scalar>(u, nullptr, 0);
  TensorEvd<Scalar> out;
  Matrix<Scalar> d = Matrix<Scalar>::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto lambda = solver.eigenvalues()(n - 1 - i);
    out.eigenvalues.push_back(lambda);
    d(i, i) = lambda;
  }
  const Shape rows = detail::half_shape(a);
  out.u = fold_matrix(u, rows, rows);
  out.d = fold_matrix(d, rows, rows);
  return out;
}

/// Inverse of a square tensor; throws NumericalError when the unfolding is
/// numerically singular (reciprocal condition estimate below n * eps).
template <typename Scalar>
Tensor<Scalar> inverse(const Tensor<Scalar>& a) {
  const Index n = detail::require_square(a, "inverse");
  const Eigen::PartialPivLU<Matrix<Scalar>> lu(matrix_view(a, ModePartition::square(a.order())));
  const auto rcond = lu.rcond();
  if (!(rcond > static_cast<double>(n) * std::numeric_limits<double>::epsilon()))
    throw NumericalError("inverse of a singular tensor (rcond " + std::to_string(static_cast<double>(rcond)) + ")");
  const Shape rows = detail::half_shape(a);
  return fold_matrix(lu.inverse(), rows, rows);
}

/// Moore-Penrose inverse relative to the partition N|M; the result has shape
/// col shape x row shape. Singular values below max(rows, cols) * eps *
/// sigma_max are treated as zero.
template <typename Scalar>
Tensor<Scalar> moore_penrose(const Tensor<Scalar>& a, ModePartition partition) {
  const Shape rows = row_shape(a, partition);
  const Shape cols = col_shape(a, partition);
  const auto mat = matrix_view(a, partition);
  Eigen::JacobiSVD<Matrix<Scalar>> solver(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = solver.singularValues();
  const double cutoff = sv.size() ? static_cast<double>(std::max(mat.rows(), mat.cols())) *
                                        std::numeric_limits<double>::epsilon() * static_cast<double>(sv(0))
                                  : 0.0;
  Matrix<Scalar> pinv = Matrix<Scalar>::Zero(mat.cols(), mat.rows());
  for (Index i = 0; i < sv.size(); ++i) {
    if (!(static_cast<double>(sv(i)) > cutoff)) break;
    pinv += solver.matrixV().col(i) * (Scalar(1) / static_cast<Scalar>(sv(i))) * solver.matrixU().col(i).adjoint();
  }
  return fold_matrix(pinv, cols, rows);
}

/// Doolittle LU of a square tensor without pivoting. Throws NumericalError
/// ("LU inapplicable") when a pivot magnitude falls to tol (default
/// 1e-12 * max|a|).
template <typename Scalar>
TensorLu<Scalar> lu(const Tensor<Scalar>& a, std::optional<double> tol = {}) {
  const Index n = detail::require_square(a, "LU");
  const auto mat = matrix_view(a, ModePartition::square(a.order()));
  const double t = tol ? *tol : 1e-12 * static_cast<double>(max_abs(a));
  Matrix<Scalar> l = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar> u = Matrix<Scalar>::Zero(n, n);
  for (Index k = 0; k < n; ++k) {
    for (Index j = k; j < n; ++j) {
      Scalar s = mat(k, j);
      for (Index q = 0; q < k; ++q) s -= l(k, q) * u(q, j);
      u(k, j) = s;
    }
    if (!(static_cast<double>(std::abs(u(k, k))) > t))
      throw NumericalError("LU inapplicable: pivot " + std::to_string(k + 1) + " vanishes without pivoting");
    for (Index i = k + 1; i < n; ++i) {
      Scalar s = mat(i, k);
      for (Index q = 0; q < k; ++q) s -= l(i, q) * u(q, k);
      l(i, k) = s / u(k, k);
    }
  }
  const Shape rows = detail::half_shape(a);
  return {fold_matrix(l, rows, rows), fold_matrix(u, rows, rows)};
}

/// Solves a *_N x = b given lu(a): forward substitution with l, then backward
/// substitution with u, both in linear-index order. b may carry any number of
/// trailing modes after the leading N.
template <typename Scalar>
Tensor<Scalar> lu_solve(const TensorLu<Scalar>& f, const Tensor<Scalar>& b) {
  const Index n = detail::require_square(f.l, "lu_solve");
  if (f.u.shape() != f.l.shape()) throw ShapeError("lu_solve: factor shapes differ");
  const Index half = f.l.order() / 2;
  if (b.order() < half || !std::equal(f.l.shape().begin(), f.l.shape().begin() + half, b.shape().begin()))
    throw ShapeError("lu_solve: right-hand side " + to_string(b.shape()) + " does not conform to " +
                     to_string(f.l.shape()));
  if (!is_pseudo_triangular(f.l, true) || !is_pseudo_triangular(f.u, false))
    throw ShapeError("lu_solve: factors are not pseudo-triangular");
  const auto l = matrix_view(f.l, ModePartition::square(f.l.order()));
  const auto u = matrix_view(f.u, ModePartition::square(f.u.order()));
  for (Index i = 0; i < n; ++i)
    if (std::abs(l(i, i) - Scalar(1)) > 1e-12) throw ShapeError("lu_solve: lower factor needs a unit pseudo-diagonal");

  const ModePartition bp{half, b.order() - half};
  Tensor<Scalar> x = b;
  auto xm = matrix_view(x, bp);
  for (Index i = 0; i < n; ++i)
    for (Index q = 0; q < i; ++q) xm.row(i) -= l(i, q) * xm.row(q);
  for (Index i = n - 1; i >= 0; --i) {
    for (Index q = i + 1; q < n; ++q) xm.row(i) -= u(i, q) * xm.row(q);
    if (u(i, i) == Scalar(0)) throw NumericalError("lu_solve: zero pivot in upper factor");
    xm.row(i) /= u(i, i);
  }
  return x;
}

/// Sum of the pseudo-diagonal entries a(i_1..i_N, i_1..i_N).
template <typename Scalar>
Scalar trace(const Tensor<Scalar>& a) {
  const Index n = detail::require_square(a, "trace");
  Scalar s(0);
  for (Index i = 0; i < n; ++i) s += a[i + n * i];
  return s;
}

/// Unfolding determinant det(f(a)), equal to the product of eigenvalues.
template <typename Scalar>
Scalar determinant(const Tensor<Scalar>& a) {
  detail::require_square(a, "determinant");
  return Eigen::FullPivLU<Matrix<Scalar>>(matrix_view(a, ModePartition::square(a.order()))).determinant();
}

namespace detail {
template <typename Real>
Real psd_floor(const std::vector<Real>& eig) {
  const Real scale = eig.empty() ? Real(1) : std::max<Real>(Real(1), std::max(std::abs(eig.front()), std::abs(eig.back())));
  return Real(-1e-10) * scale;
}

template <typename Scalar, typename F>
Tensor<Scalar> spectral_map(const TensorEvd<Scalar>& e, F&& fn) {
  const auto p = ModePartition::square(e.u.order());
  const auto u = matrix_view(e.u, p);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(static_cast<Index>(e.eigenvalues.size()));
  for (Index i = 0; i < w.size(); ++i) w(i) = static_cast<Scalar>(fn(e.eigenvalues[static_cast<std::size_t>(i)]));
  const Matrix<Scalar> m = u * w.asDiagonal() * u.adjoint();
  const Shape rows(e.u.shape().begin(), e.u.shape().begin() + e.u.order() / 2);
  return fold_matrix(m, rows, rows);
}
}  // namespace detail

/// True when every eigenvalue of the Hermitian tensor is >= -1e-10 (scaled by
/// max(1, |lambda|max)). Throws on non-Hermitian input.
template <typename Scalar>
bool is_psd(const Tensor<Scalar>& a) {
  const auto e = evd_hermitian(a);
  return e.eigenvalues.empty() || e.eigenvalues.back() >= detail::psd_floor(e.eigenvalues);
}

/// Principal square root u *_N d^{1/2} *_N u^H of a PSD tensor.
template <typename Scalar>
Tensor<Scalar> sqrt_psd(const Tensor<Scalar>& a) {
  const auto e = evd_hermitian(a);
  if (!e.eigenvalues.empty() && e.eigenvalues.back() < detail::psd_floor(e.eigenvalues))
    throw NumericalError("square root of a tensor that is not positive semi-definite");
  using Real = typename TensorEvd<Scalar>::RealScalar;
  return detail::spectral_map(e, [](Real l) { return std::sqrt(std::max<Real>(l, Real(0))); });
}

/// Inverse u *_N d^{-1} *_N u^H of a positive definite tensor.
template <typename Scalar>
Tensor<Scalar> inv_pd(const Tensor<Scalar>& a) {
  const auto e = evd_hermitian(a);
  using Real = typename TensorEvd<Scalar>::RealScalar;
  const Real floor = e.eigenvalues.empty()
                         ? Real(0)
                         : static_cast<Real>(e.eigenvalues.size()) * std::numeric_limits<Real>::epsilon() *
                               std::abs(e.eigenvalues.front());
  if (!e.eigenvalues.empty() && !(e.eigenvalues.back() > floor))
    throw NumericalError("inverse of a tensor that is not positive definite");
  return detail::spectral_map(e, [](Real l) { return Real(1) / l; });
}

}  // namespace mlt

#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace mlt;
using testing::cat;
using testing::rand_shape;
using testing::rand_tensor;
using testing::rel_err;

namespace {

DenseTensor pseudo_diag(std::initializer_list<Complex> entries, const Shape& rows, const Shape& cols) {
  const Index nr = shape_size(rows), nc = shape_size(cols);
  Matrix<Complex> m = Matrix<Complex>::Zero(nr, nc);
  Index i = 0;
  for (const auto& e : entries) m(i, i) = e, ++i;
  return fold_matrix(m, rows, cols);
}

DenseTensor rand_hpd(const Shape& rows) {
  const auto b = rand_tensor(cat(rows, rows));
  const auto n = static_cast<Index>(rows.size());
  return einstein_product(hermitian_default(b), b, n);
}

bool close(Complex a, Complex b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("svd") {
  SUBCASE("identity") {
    const auto s = svd(identity_tensor({2, 3}), {2, 2});
    REQUIRE(s.singular_values.size() == 6);
    for (double v : s.singular_values) CHECK(v == doctest::Approx(1.0));
  }
  SUBCASE("pseudo-diagonal") {
    const auto s = svd(pseudo_diag({2.0, -1.0}, {2}, {2}), {1, 1});
    CHECK(s.singular_values[0] == doctest::Approx(2.0));
    CHECK(s.singular_values[1] == doctest::Approx(1.0));
  }
  SUBCASE("reconstruction and unitarity") {
    for (int it = 0; it < 10; ++it) {
      const auto a = rand_tensor({2, 3, 2, 2});
      const auto s = svd(a, {2, 2});
      CHECK(std::is_sorted(s.singular_values.rbegin(), s.singular_values.rend()));
      const auto rec = einstein_product(einstein_product(s.u, s.d, 2), hermitian_default(s.v), 2);
      CHECK(frobenius_norm(rec - a) <= 1e-10 * frobenius_norm(a));
      CHECK(rel_err(einstein_product(hermitian_default(s.u), s.u, 2), identity_tensor({2, 3})) < 1e-12);
      CHECK(rel_err(einstein_product(hermitian_default(s.v), s.v, 2), identity_tensor({2, 2})) < 1e-12);
      CHECK(is_pseudo_diagonal(s.d, {2, 2}));
    }
  }
  SUBCASE("phase convention is deterministic") {
    const auto a = rand_tensor({3, 2, 3});
    const auto s1 = svd(a, {1, 2});
    const auto s2 = svd(DenseTensor(a), {1, 2});
    CHECK(s1.u == s2.u);
    const auto um = matrix_view(s1.u, {1, 1});
    for (Index c = 0; c < um.cols(); ++c) {
      Index best = 0;
      um.col(c).cwiseAbs().maxCoeff(&best);
      CHECK(std::abs(um(best, c).imag()) < 1e-12);
      CHECK(um(best, c).real() > 0);
    }
  }
  SUBCASE("singular values are roots of eigenvalues of A^H A") {
    for (int it = 0; it < 10; ++it) {
      const auto a = rand_tensor({2, 2, 3});
      const auto s = svd(a, {2, 1});
      const auto e = evd_hermitian(einstein_product(hermitian_default(a, {2, 1}), a, 2));
      for (std::size_t k = 0; k < s.singular_values.size(); ++k)
        CHECK(s.singular_values[k] == doctest::Approx(std::sqrt(std::max(0.0, e.eigenvalues[k]))).epsilon(1e-9));
    }
  }
}

TEST_CASE("hermitian evd") {
  const auto e = evd_hermitian(identity_tensor({2, 2}));
  for (double v : e.eigenvalues) CHECK(v == doctest::Approx(1.0));

  auto x = rand_tensor({2, 3});
  x *= Complex(1.0 / frobenius_norm(x));
  const auto proj = outer_product(x, conj(x));
  const auto pe = evd_hermitian(proj);
  CHECK(pe.eigenvalues[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < pe.eigenvalues.size(); ++k) CHECK(std::abs(pe.eigenvalues[k]) < 1e-12);

  for (int it = 0; it < 10; ++it) {
    const auto a = rand_hpd({2, 2});
    const auto ev = evd_hermitian(a);
    CHECK(std::is_sorted(ev.eigenvalues.rbegin(), ev.eigenvalues.rend()));
    for (std::size_t k = 0; k < ev.eigenvalues.size(); ++k) {
      CHECK(ev.eigenvalues[k] >= -1e-10);
      const auto xk = ev.eigentensor(static_cast<Index>(k));
      const auto res = einstein_product(a, xk, 2) - Complex(ev.eigenvalues[k]) * xk;
      CHECK(frobenius_norm(res) < 1e-10 * frobenius_norm(a));
    }
    const auto rec = einstein_product(einstein_product(ev.u, ev.d, 2), hermitian_default(ev.u), 2);
    CHECK(rel_err(rec, a) < 1e-10);
    // eigenvalues of a Hermitian tensor from a general complex solver are real
    Eigen::ComplexEigenSolver<Matrix<Complex>> ces(matrix_view(a, {2, 2}));
    CHECK(ces.eigenvalues().imag().cwiseAbs().maxCoeff() <= 1e-12 * ces.eigenvalues().cwiseAbs().maxCoeff());
  }
  CHECK_THROWS_AS(evd_hermitian(rand_tensor({2, 2, 2, 2})), std::invalid_argument);
  CHECK_THROWS_AS(evd_hermitian(rand_tensor({2, 3})), ShapeError);
  CHECK(is_hermitian(rand_hpd({3})));
}

TEST_CASE("inverse") {
  CHECK(rel_err(inverse(identity_tensor({2, 3})), identity_tensor({2, 3})) == 0.0);
  const auto d = pseudo_diag({2.0, 4.0, Complex(0, 1), -0.5}, {2, 2}, {2, 2});
  CHECK(rel_err(inverse(d), pseudo_diag({0.5, 0.25, Complex(0, -1), -2.0}, {2, 2}, {2, 2})) < 1e-15);
  for (int it = 0; it < 10; ++it) {
    const auto a = rand_tensor({2, 3, 2, 3}), b = rand_tensor({2, 3, 2, 3});
    const auto ai = inverse(a);
    CHECK(rel_err(einstein_product(a, ai, 2), identity_tensor({2, 3})) < 1e-10);
    CHECK(rel_err(einstein_product(ai, a, 2), identity_tensor({2, 3})) < 1e-10);
    CHECK(rel_err(inverse(einstein_product(a, b, 2)), einstein_product(inverse(b), ai, 2)) < 1e-9);
  }
  CHECK_THROWS_AS(inverse(DenseTensor::ones({2, 2, 2, 2})), NumericalError);
  CHECK_THROWS_AS(inverse(rand_tensor({2, 3})), ShapeError);
}

TEST_CASE("moore-penrose") {
  const auto z = moore_penrose(DenseTensor::zeros({2, 3, 4}), {2, 1});
  CHECK(z == DenseTensor::zeros({4, 2, 3}));
  const auto a = rand_tensor({2, 2, 2, 2});
  CHECK(rel_err(moore_penrose(a, {2, 2}), inverse(a)) < 1e-10);

  for (int it = 0; it < 20; ++it) {
    // rank-deficient: truncate the SVD of a random 2x3|2x2 tensor
    const auto r = rand_tensor({2, 3, 2, 2});
    auto s = svd(r, {2, 2});
    auto dm = matrix_view(s.d, {2, 2});
    dm(2, 2) = dm(3, 3) = 0.0;
    const auto x = einstein_product(einstein_product(s.u, s.d, 2), hermitian_default(s.v), 2);
    const auto p = moore_penrose(x, {2, 2});
    CHECK(p.shape() == Shape{2, 2, 2, 3});
    CHECK(rel_err(einstein_product(einstein_product(x, p, 2), x, 2), x) < 1e-10);
    CHECK(rel_err(einstein_product(einstein_product(p, x, 2), p, 2), p) < 1e-10);
    const auto xp = einstein_product(x, p, 2), px = einstein_product(p, x, 2);
    CHECK(rel_err(hermitian_default(xp), xp) < 1e-10);
    CHECK(rel_err(hermitian_default(px), px) < 1e-10);
  }
}

TEST_CASE("lu and triangular solves") {
  const auto id = identity_tensor({2, 2});
  const auto f = lu(id);
  CHECK(f.l == id);
  CHECK(f.u == id);
  const auto d = pseudo_diag({1.0, 2.0, 3.0, 4.0}, {2, 2}, {2, 2});
  const auto fd = lu(d);
  CHECK(fd.l == id);
  CHECK(fd.u == d);

  for (int it = 0; it < 10; ++it) {
    auto a = rand_tensor({2, 2, 2, 2});
    a += Complex(10) * id;
    const auto fa = lu(a);
    CHECK(is_pseudo_triangular(fa.l, true));
    CHECK(is_pseudo_triangular(fa.u, false));
    CHECK(frobenius_norm(einstein_product(fa.l, fa.u, 2) - a) <= 1e-10 * frobenius_norm(a));
    const auto x0 = rand_tensor({2, 2, 3});
    CHECK(rel_err(lu_solve(fa, einstein_product(a, x0, 2)), x0) < 1e-10);
    CHECK(rel_err(lu_solve(fa, id), inverse(a)) < 1e-10);
  }
  const auto b = rand_tensor({2, 2});
  CHECK(lu_solve(TensorLu<Complex>{id, id}, b) == b);

  DenseTensor zero_pivot(Shape{2, 2}, {Complex(0), Complex(1), Complex(1), Complex(0)});
  CHECK_THROWS_WITH_AS(lu(zero_pivot), doctest::Contains("LU inapplicable"), NumericalError);
  CHECK_THROWS_AS(lu_solve(TensorLu<Complex>{rand_tensor({2, 2}), id}, b), ShapeError);
  CHECK_THROWS_AS(lu_solve(f, rand_tensor({3, 2})), ShapeError);
}

TEST_CASE("trace") {
  CHECK(trace(identity_tensor({2, 3})) == Complex(6));
  const auto a = rand_tensor({2, 3, 2, 3});
  Complex s(0);
  for (Index i = 1; i <= 2; ++i)
    for (Index j = 1; j <= 3; ++j) s += a(i, j, i, j);
  CHECK(close(trace(a), s, 1e-14));

  for (int it = 0; it < 10; ++it) {
    const Shape sn = rand_shape(testing::rand_int(1, 2), 3), sm = rand_shape(testing::rand_int(1, 2), 3);
    const auto x = rand_tensor(cat(sn, sm)), y = rand_tensor(cat(sm, sn));
    const auto n = static_cast<Index>(sn.size()), m = static_cast<Index>(sm.size());
    CHECK(close(trace(einstein_product(x, y, m)), trace(einstein_product(y, x, n)), 1e-12));
    // tr of the outer product of two same-shape matrices-as-tensors
    const auto u = rand_tensor(sn), v = rand_tensor(sn);
    CHECK(close(trace(outer_product(u, v)), inner_product(u, v), 1e-12));
  }
  const auto h = rand_hpd({2, 3});
  const auto e = evd_hermitian(h);
  double ev_sum = 0;
  for (double l : e.eigenvalues) ev_sum += l;
  CHECK(close(trace(h), Complex(ev_sum), 1e-12));
  CHECK_THROWS_AS(trace(rand_tensor({2, 3})), ShapeError);
}

TEST_CASE("determinant") {
  CHECK(close(determinant(identity_tensor({2, 3})), Complex(1), 1e-15));
  CHECK(close(determinant(pseudo_diag({1.0, 2.0, 3.0, 4.0}, {2, 2}, {2, 2})), Complex(24), 1e-14));
  for (int it = 0; it < 10; ++it) {
    const auto a = rand_tensor({2, 2, 2, 2}), b = rand_tensor({2, 2, 2, 2});
    CHECK(close(determinant(einstein_product(a, b, 2)), determinant(a) * determinant(b), 1e-10));
    const auto u = svd(a, {2, 2}).u;
    CHECK(std::abs(determinant(u)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("sylvester identity") {
    for (int it = 0; it < 10; ++it) {
      const Shape sn = rand_shape(2, 3), sm = rand_shape(testing::rand_int(1, 2), 3);
      const auto a = rand_tensor(cat(sn, sm)), b = rand_tensor(cat(sm, sn));
      const auto n = static_cast<Index>(sn.size()), m = static_cast<Index>(sm.size());
      const auto lhs = determinant(identity_tensor(sn) + einstein_product(a, b, m));
      const auto rhs = determinant(identity_tensor(sm) + einstein_product(b, a, n));
      CHECK(close(lhs, rhs, 1e-9));
    }
  }
  CHECK_THROWS_AS(determinant(rand_tensor({2, 2, 3})), ShapeError);
}

TEST_CASE("psd functions") {
  const auto id = identity_tensor({2, 2});
  CHECK(is_psd(id));
  CHECK(rel_err(sqrt_psd(id), id) < 1e-14);
  CHECK(rel_err(sqrt_psd(pseudo_diag({4.0, 9.0}, {2}, {2})), pseudo_diag({2.0, 3.0}, {2}, {2})) < 1e-14);
  for (int it = 0; it < 10; ++it) {
    const auto a = rand_hpd({2, 3});
    CHECK(is_psd(a));
    const auto r = sqrt_psd(a);
    CHECK(rel_err(einstein_product(r, r, 2), a) < 1e-9);
    CHECK(rel_err(inv_pd(a), inverse(a)) < 1e-9);
  }
  const auto neg = pseudo_diag({1.0, -1.0}, {2}, {2});
  CHECK_FALSE(is_psd(neg));
  CHECK_THROWS_AS(sqrt_psd(neg), NumericalError);
  CHECK_THROWS_AS(inv_pd(pseudo_diag({1.0, 0.0}, {2}, {2})), NumericalError);
  CHECK_THROWS_AS(is_psd(rand_tensor({2, 2})), std::invalid_argument);
}

#pragma once

#include "mlt/tensor.hpp"

#include <array>
#include <optional>

namespace mlt {

namespace detail {

/// Flat offsets of every multi-index over `modes` (0-based positions), the
/// first listed mode varying fastest.
inline std::vector<Index> offset_table(std::span<const Index> shape, std::span<const Index> strides,
                                       std::span<const Index> modes) {
  std::vector<Index> table{0};
  for (Index m : modes) {
    const Index dim = shape[static_cast<std::size_t>(m)];
    const Index stride = strides[static_cast<std::size_t>(m)];
    std::vector<Index> next;
    next.reserve(table.size() * static_cast<std::size_t>(dim));
    for (Index v = 0; v < dim; ++v)
      for (Index t : table) next.push_back(t + v * stride);
    table = std::move(next);
  }
  return table;
}

inline std::vector<Index> complement_modes(Index order, std::span<const Index> used) {
  std::vector<Index> free;
  for (Index m = 0; m < order; ++m)
    if (std::find(used.begin(), used.end(), m) == used.end()) free.push_back(m);
  return free;
}

inline std::vector<Index> to_zero_based(std::span<const Index> modes, Index order, const char* operand) {
  std::vector<Index> out;
  out.reserve(modes.size());
  for (Index m : modes) {
    if (m < 1 || m > order)
      throw ShapeError(std::string("mode position ") + std::to_string(m) + " out of range for operand " + operand +
                       " of order " + std::to_string(order));
    const Index z = m - 1;
    if (std::find(out.begin(), out.end(), z) != out.end())
      throw ShapeError(std::string("repeated mode position ") + std::to_string(m) + " in operand " + operand);
    out.push_back(z);
  }
  return out;
}

template <typename Scalar>
typename Tensor<Scalar>::RealScalar default_tol(const Tensor<Scalar>& a, std::optional<double> tol) {
  return tol ? static_cast<typename Tensor<Scalar>::RealScalar>(*tol) : 1e-12 * max_abs(a);
}

inline Shape concat(std::span<const Index> x, std::span<const Index> y) {
  Shape out(x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  return out;
}

}  // namespace detail

/// General contracted product {a, b}_{modes_a; modes_b}.
///
/// Sums over the paired modes; the result carries a's free modes in their
/// original order followed by b's free modes in theirs. Mode positions are
/// 1-based.
template <typename Scalar>
Tensor<Scalar> contracted_product(const Tensor<Scalar>& a, const Tensor<Scalar>& b, const ModePairing& pairing) {
  if (pairing.modes_a.size() != pairing.modes_b.size())
    throw ShapeError("mode pairing lists have different lengths");
  const auto con_a = detail::to_zero_based(pairing.modes_a, a.order(), "a");
  const auto con_b = detail::to_zero_based(pairing.modes_b, b.order(), "b");
  for (std::size_t p = 0; p < con_a.size(); ++p) {
    const Index da = a.shape()[static_cast<std::size_t>(con_a[p])];
    const Index db = b.shape()[static_cast<std::size_t>(con_b[p])];
    if (da != db)
      throw ShapeError("paired modes " + std::to_string(con_a[p] + 1) + " and " + std::to_string(con_b[p] + 1) +
                       " have sizes " + std::to_string(da) + " and " + std::to_string(db));
  }
  const auto free_a = detail::complement_modes(a.order(), con_a);
  const auto free_b = detail::complement_modes(b.order(), con_b);

  Shape out_shape;
  for (Index m : free_a) out_shape.push_back(a.shape()[static_cast<std::size_t>(m)]);
  for (Index m : free_b) out_shape.push_back(b.shape()[static_cast<std::size_t>(m)]);
  Tensor<Scalar> out(std::move(out_shape));

  const Shape sa = detail::strides_of(a.shape());
  const Shape sb = detail::strides_of(b.shape());
  const auto a_free = detail::offset_table(a.shape(), sa, free_a);
  const auto a_con = detail::offset_table(a.shape(), sa, con_a);
  const auto b_con = detail::offset_table(b.shape(), sb, con_b);
  const auto b_free = detail::offset_table(b.shape(), sb, free_b);

  const Index n_free_a = static_cast<Index>(a_free.size());
  const auto ad = a.data();
  const auto bd = b.data();
  auto od = out.data();
  for (std::size_t fb = 0; fb < b_free.size(); ++fb) {
    Scalar* column = od.data() + static_cast<Index>(fb) * n_free_a;
    for (std::size_t c = 0; c < a_con.size(); ++c) {
      const Scalar bv = bd[static_cast<std::size_t>(b_con[c] + b_free[fb])];
      if (bv == Scalar(0)) continue;
      const Scalar* abase = ad.data() + a_con[c];
      for (Index fa = 0; fa < n_free_a; ++fa) column[fa] += abase[a_free[static_cast<std::size_t>(fa)]] * bv;
    }
  }
  return out;
}

/// Einstein product a *_n b: contracts the trailing n modes of a with the
/// leading n modes of b.
template <typename Scalar>
Tensor<Scalar> einstein_product(const Tensor<Scalar>& a, const Tensor<Scalar>& b, Index n) {
  if (n < 0 || n > a.order() || n > b.order())
    throw ShapeError("Einstein product over " + std::to_string(n) + " modes of operands with orders " +
                     std::to_string(a.order()) + " and " + std::to_string(b.order()));
  ModePairing pairing;
  for (Index k = 1; k <= n; ++k) {
    pairing.modes_a.push_back(a.order() - n + k);
    pairing.modes_b.push_back(k);
  }
  return contracted_product(a, b, pairing);
}

/// Sum of elementwise products over all modes. Not conjugated; see conj_dot.
template <typename Scalar>
Scalar inner_product(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("inner product needs equal shapes, got " + to_string(a.shape()) + " and " + to_string(b.shape()));
  return einstein_product(a, b, a.order())[0];
}

template <typename Scalar>
Tensor<Scalar> outer_product(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  return einstein_product(a, b, 0);
}

/// Kronecker product of two matrices, (IK) x (JL) block layout.
template <typename Scalar>
Tensor<Scalar> kronecker(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.order() != 2 || b.order() != 2) throw ShapeError("kronecker product needs two matrices");
  const Index ar = a.shape()[0], ac = a.shape()[1], br = b.shape()[0], bc = b.shape()[1];
  Tensor<Scalar> out(Shape{ar * br, ac * bc});
  const Index rows = ar * br;
  for (Index j = 0; j < ac; ++j)
    for (Index i = 0; i < ar; ++i) {
      const Scalar aij = a[i + ar * j];
      for (Index l = 0; l < bc; ++l)
        for (Index k = 0; k < br; ++k) out[(i * br + k) + rows * (j * bc + l)] = aij * b[k + br * l];
    }
  return out;
}

/// Mode-n product a x_n u with u of size J x I_n; mode n (1-based) becomes J.
template <typename Scalar>
Tensor<Scalar> n_mode_product(const Tensor<Scalar>& a, const Tensor<Scalar>& u, Index n) {
  if (u.order() != 2) throw ShapeError("n-mode product needs a matrix operand");
  const Index in = a.dim(n);
  if (u.shape()[1] != in)
    throw ShapeError("n-mode product: matrix has " + std::to_string(u.shape()[1]) + " columns, mode " +
                     std::to_string(n) + " has size " + std::to_string(in));
  const Index j_rows = u.shape()[0];
  Index left = 1, right = 1;
  for (Index k = 0; k < n - 1; ++k) left *= a.shape()[static_cast<std::size_t>(k)];
  for (Index k = n; k < a.order(); ++k) right *= a.shape()[static_cast<std::size_t>(k)];

  Shape out_shape = a.shape();
  out_shape[static_cast<std::size_t>(n - 1)] = j_rows;
  Tensor<Scalar> out(std::move(out_shape));
  for (Index r = 0; r < right; ++r)
    for (Index i = 0; i < in; ++i) {
      const Scalar* src = a.data().data() + left * (i + in * r);
      for (Index j = 0; j < j_rows; ++j) {
        const Scalar uji = u[j + j_rows * i];
        Scalar* dst = out.data().data() + left * (j + j_rows * r);
        for (Index l = 0; l < left; ++l) dst[l] += src[l] * uji;
      }
    }
  return out;
}

/// Transpose by a mode permutation: result(i_{sigma(1)}, ..., i_{sigma(K)}) =
/// a(i_1, ..., i_K), sigma given 1-based.
template <typename Scalar>
Tensor<Scalar> permute(const Tensor<Scalar>& a, std::span<const Index> sigma) {
  const Index order = a.order();
  if (static_cast<Index>(sigma.size()) != order) throw ShapeError("permutation length does not match tensor order");
  std::vector<bool> seen(static_cast<std::size_t>(order), false);
  for (Index s : sigma) {
    if (s < 1 || s > order || seen[static_cast<std::size_t>(s - 1)])
      throw ShapeError("invalid mode permutation");
    seen[static_cast<std::size_t>(s - 1)] = true;
  }
  Shape out_shape(static_cast<std::size_t>(order));
  for (Index m = 0; m < order; ++m)
    out_shape[static_cast<std::size_t>(m)] = a.shape()[static_cast<std::size_t>(sigma[static_cast<std::size_t>(m)] - 1)];
  const Shape out_strides = detail::strides_of(out_shape);
  // stride in the output of each source mode
  Shape dest_stride(static_cast<std::size_t>(order));
  for (Index m = 0; m < order; ++m)
    dest_stride[static_cast<std::size_t>(sigma[static_cast<std::size_t>(m)] - 1)] = out_strides[static_cast<std::size_t>(m)];

  Tensor<Scalar> out(std::move(out_shape));
  Shape idx(static_cast<std::size_t>(order), 0);
  Index dest = 0;
  for (Index src = 0; src < a.size(); ++src) {
    out[dest] = a[src];
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < a.shape()[k]) {
        dest += dest_stride[k];
        break;
      }
      dest -= (idx[k] - 1) * dest_stride[k];
      idx[k] = 0;
    }
  }
  return out;
}

template <typename Scalar>
Tensor<Scalar> permute(const Tensor<Scalar>& a, std::initializer_list<Index> sigma) {
  return permute(a, std::span<const Index>(sigma.begin(), sigma.size()));
}

/// Conjugate of permute(a, sigma).
template <typename Scalar>
Tensor<Scalar> hermitian(const Tensor<Scalar>& a, std::span<const Index> sigma) {
  return conj(permute(a, sigma));
}

namespace detail {
inline Shape block_swap(ModePartition p) {
  Shape sigma;
  for (Index k = 1; k <= p.n_col; ++k) sigma.push_back(p.n_row + k);
  for (Index k = 1; k <= p.n_row; ++k) sigma.push_back(k);
  return sigma;
}

template <typename Scalar>
void require_partition(const Tensor<Scalar>& a, ModePartition p) {
  if (p.n_row < 0 || p.n_col < 0 || p.order() != a.order())
    throw ShapeError("partition " + std::to_string(p.n_row) + "|" + std::to_string(p.n_col) +
                     " invalid for tensor of order " + std::to_string(a.order()));
}
}  // namespace detail

/// Default transpose: the trailing n_col modes are moved in front of the
/// leading n_row modes.
template <typename Scalar>
Tensor<Scalar> transpose_default(const Tensor<Scalar>& a, ModePartition partition) {
  detail::require_partition(a, partition);
  return permute(a, std::span<const Index>(detail::block_swap(partition)));
}

/// Default Hermitian: conjugated block-swap transpose.
template <typename Scalar>
Tensor<Scalar> hermitian_default(const Tensor<Scalar>& a, ModePartition partition) {
  return conj(transpose_default(a, partition));
}

/// Hermitian with the N|N split of a square tensor.
template <typename Scalar>
Tensor<Scalar> hermitian_default(const Tensor<Scalar>& a) {
  return hermitian_default(a, ModePartition::square(a.order()));
}

/// Identity tensor over `row_shape`: order 2N, entries prod_k delta(i_k, j_k).
template <typename Scalar = Complex>
Tensor<Scalar> identity_tensor(const Shape& row_shape) {
  Tensor<Scalar> out(detail::concat(row_shape, row_shape));
  const Index n = shape_size(row_shape);
  for (Index r = 0; r < n; ++r) out[r + n * r] = Scalar(1);
  return out;
}

/// True when the first half of the modes matches the second half.
template <typename Scalar>
bool is_square(const Tensor<Scalar>& a) {
  if (a.order() % 2 != 0) return false;
  const auto half = static_cast<std::size_t>(a.order() / 2);
  return std::equal(a.shape().begin(), a.shape().begin() + static_cast<std::ptrdiff_t>(half),
                    a.shape().begin() + static_cast<std::ptrdiff_t>(half));
}

template <typename Scalar>
bool is_pseudo_diagonal(const Tensor<Scalar>& a, ModePartition partition, std::optional<double> tol = {}) {
  detail::require_partition(a, partition);
  const auto t = detail::default_tol(a, tol);
  Index rows = 1;
  for (Index k = 0; k < partition.n_row; ++k) rows *= a.shape()[static_cast<std::size_t>(k)];
  const Index cols = a.size() / rows;
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r)
      if (r != c && std::abs(a[r + rows * c]) > t) return false;
  return true;
}

/// Pseudo-triangularity of a square tensor. The pseudo-diagonal belongs to the
/// triangle: lower means every entry with column index above row index
/// vanishes, upper the converse.
template <typename Scalar>
bool is_pseudo_triangular(const Tensor<Scalar>& a, bool lower, std::optional<double> tol = {}) {
  if (!is_square(a)) throw ShapeError("pseudo-triangularity needs a square tensor, got " + to_string(a.shape()));
  const auto t = detail::default_tol(a, tol);
  Index n = 1;
  for (Index k = 0; k < a.order() / 2; ++k) n *= a.shape()[static_cast<std::size_t>(k)];
  for (Index c = 0; c < n; ++c)
    for (Index r = 0; r < n; ++r) {
      const bool outside = lower ? c > r : r > c;
      if (outside && std::abs(a[r + n * c]) > t) return false;
    }
  return true;
}

/// Mode-`mode` fiber; `fixed` holds the 1-based indices of the other modes in
/// order.
template <typename Scalar>
Tensor<Scalar> fiber(const Tensor<Scalar>& a, Index mode, std::span<const Index> fixed) {
  const Index len = a.dim(mode);
  if (static_cast<Index>(fixed.size()) != a.order() - 1)
    throw ShapeError("fiber needs " + std::to_string(a.order() - 1) + " fixed indices");
  Shape index;
  for (std::size_t k = 0, f = 0; k < static_cast<std::size_t>(a.order()); ++k)
    index.push_back(static_cast<Index>(k) == mode - 1 ? 1 : fixed[f++]);
  const Index base = a.offset_of(index);
  const Index stride = detail::strides_of(a.shape())[static_cast<std::size_t>(mode - 1)];
  Tensor<Scalar> out(Shape{len});
  for (Index i = 0; i < len; ++i) out[i] = a[base + i * stride];
  return out;
}

/// Slice over the two `free_modes`; `fixed` holds the 1-based indices of the
/// remaining modes in order. The first free mode indexes the rows.
template <typename Scalar>
Tensor<Scalar> slice(const Tensor<Scalar>& a, std::array<Index, 2> free_modes, std::span<const Index> fixed) {
  const Index rows = a.dim(free_modes[0]);
  const Index cols = a.dim(free_modes[1]);
  if (free_modes[0] == free_modes[1]) throw ShapeError("slice needs two distinct modes");
  if (static_cast<Index>(fixed.size()) != a.order() - 2)
    throw ShapeError("slice needs " + std::to_string(a.order() - 2) + " fixed indices");
  Shape index;
  for (Index k = 1, f = 0; k <= a.order(); ++k)
    index.push_back(k == free_modes[0] || k == free_modes[1] ? 1 : fixed[static_cast<std::size_t>(f++)]);
  const Index base = a.offset_of(index);
  const Shape strides = detail::strides_of(a.shape());
  const Index rs = strides[static_cast<std::size_t>(free_modes[0] - 1)];
  const Index cs = strides[static_cast<std::size_t>(free_modes[1] - 1)];
  Tensor<Scalar> out(Shape{rows, cols});
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) out[r + rows * c] = a[base + r * rs + c * cs];
  return out;
}

}  // namespace mlt

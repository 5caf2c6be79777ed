#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mlt {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Complex = std::complex<double>;

/// Thrown when operand shapes, mode positions or partitions do not conform.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical precondition fails (singular operator, tiny pivot, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Index shape_size(std::span<const Index> shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>{});
}

inline std::string to_string(std::span<const Index> shape) {
  std::string out = "(";
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(shape[k]);
  }
  return out + ")";
}

/// Split of a tensor's modes into `n_row` leading row modes and `n_col`
/// trailing column modes.
struct ModePartition {
  Index n_row = 0;
  Index n_col = 0;

  constexpr Index order() const noexcept { return n_row + n_col; }
  /// The N|N split of an order-2N tensor.
  static ModePartition square(Index order) { return {order / 2, order - order / 2}; }
  bool operator==(const ModePartition&) const = default;
};

/// Paired mode positions (1-based) of two operands of a contracted product.
struct ModePairing {
  std::vector<Index> modes_a;
  std::vector<Index> modes_b;
};

namespace detail {

template <typename Scalar>
inline Scalar conj(const Scalar& s) {
  return Eigen::numext::conj(s);
}

/// Column-major (first mode fastest) strides.
inline Shape strides_of(std::span<const Index> shape) {
  Shape strides(shape.size());
  Index s = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    strides[k] = s;
    s *= shape[k];
  }
  return strides;
}

inline void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace detail

/// Dense multi-way array with an explicit shape.
///
/// Storage is a flat vector in which the first mode varies fastest, i.e. the
/// element with 1-based indices (i_1, ..., i_K) lives at offset
/// (i_1 - 1) + sum_{k>=2} (i_k - 1) * prod_{l<k} I_l. With all modes taken as
/// row modes this is exactly the tensor-to-matrix index map, so every
/// unfolding is a reshape of the same buffer.
///
/// Element access through operator() and at() uses 1-based indices; that is
/// the only place where the 1-based convention is translated (offset_of).
/// operator[] addresses the flat buffer with 0-based offsets.
template <typename Scalar_>
class Tensor {
 public:
  using Scalar = Scalar_;
  using RealScalar = typename Eigen::NumTraits<Scalar>::Real;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Order-0 tensor holding a single zero.
  Tensor() : data_(1, Scalar(0)) {}

  explicit Tensor(Shape shape) : shape_(checked(std::move(shape))), data_(shape_size(shape_), Scalar(0)) {}

  Tensor(Shape shape, std::vector<Scalar> data) : shape_(checked(std::move(shape))), data_(std::move(data)) {
    if (static_cast<Index>(data_.size()) != shape_size(shape_))
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                       to_string(shape_));
  }

  Tensor(Shape shape, std::initializer_list<Scalar> data) : Tensor(std::move(shape), std::vector<Scalar>(data)) {}

  static Tensor constant(Shape shape, Scalar value) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
  }
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor ones(Shape shape) { return constant(std::move(shape), Scalar(1)); }

  const Shape& shape() const noexcept { return shape_; }
  Index order() const noexcept { return static_cast<Index>(shape_.size()); }
  Index size() const noexcept { return static_cast<Index>(data_.size()); }
  /// Size of 1-based mode `mode`.
  Index dim(Index mode) const {
    if (mode < 1 || mode > order())
      throw ShapeError("mode " + std::to_string(mode) + " out of range for order " + std::to_string(order()));
    return shape_[static_cast<std::size_t>(mode - 1)];
  }

  std::span<Scalar> data() noexcept { return data_; }
  std::span<const Scalar> data() const noexcept { return data_; }

  Eigen::Map<Vector> flat() noexcept { return {data_.data(), size()}; }
  Eigen::Map<const Vector> flat() const noexcept { return {data_.data(), size()}; }

  Scalar& operator[](Index offset) noexcept { return data_[static_cast<std::size_t>(offset)]; }
  const Scalar& operator[](Index offset) const noexcept { return data_[static_cast<std::size_t>(offset)]; }

  /// Flat offset of a 1-based multi-index.
  Index offset_of(std::span<const Index> index) const {
    if (static_cast<Index>(index.size()) != order())
      throw ShapeError("index of length " + std::to_string(index.size()) + " for tensor of order " +
                       std::to_string(order()));
    Index offset = 0;
    Index stride = 1;
    for (std::size_t k = 0; k < index.size(); ++k) {
      if (index[k] < 1 || index[k] > shape_[k])
        throw std::out_of_range("index " + std::to_string(index[k]) + " out of range for mode " +
                                std::to_string(k + 1) + " of size " + std::to_string(shape_[k]));
      offset += (index[k] - 1) * stride;
      stride *= shape_[k];
    }
    return offset;
  }

  Scalar& at(std::span<const Index> index) { return (*this)[offset_of(index)]; }
  const Scalar& at(std::span<const Index> index) const { return (*this)[offset_of(index)]; }

  template <typename... I>
    requires(std::convertible_to<I, Index> && ...)
  Scalar& operator()(I... index) {
    const Index idx[] = {static_cast<Index>(index)..., 0};
    return at(std::span<const Index>(idx, sizeof...(I)));
  }
  template <typename... I>
    requires(std::convertible_to<I, Index> && ...)
  const Scalar& operator()(I... index) const {
    const Index idx[] = {static_cast<Index>(index)..., 0};
    return at(std::span<const Index>(idx, sizeof...(I)));
  }

  Tensor reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }
  Tensor reshaped(Shape shape) && { return Tensor(std::move(shape), std::move(data_)); }

  Tensor& operator+=(const Tensor& other) {
    require_same_shape(other, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& other) {
    require_same_shape(other, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  Tensor& operator*=(const Scalar& alpha) {
    for (auto& v : data_) v *= alpha;
    return *this;
  }

  bool operator==(const Tensor&) const = default;

 private:
  static Shape checked(Shape shape) {
    for (Index s : shape)
      if (s < 1) throw ShapeError("mode sizes must be positive, got " + to_string(shape));
    return shape;
  }

  void require_same_shape(const Tensor& other, const char* op) const {
    if (shape_ != other.shape_)
      throw ShapeError(std::string("shape mismatch in ") + op + ": " + to_string(shape_) + " vs " +
                       to_string(other.shape_));
  }

  Shape shape_;
  std::vector<Scalar> data_;
};

using DenseTensor = Tensor<Complex>;

template <typename Scalar>
Tensor<Scalar> add(Tensor<Scalar> a, const Tensor<Scalar>& b) {
  a += b;
  return a;
}

template <typename Scalar>
Tensor<Scalar> subtract(Tensor<Scalar> a, const Tensor<Scalar>& b) {
  a -= b;
  return a;
}

template <typename Scalar>
Tensor<Scalar> scale(const Scalar& alpha, Tensor<Scalar> a) {
  a *= alpha;
  return a;
}

template <typename Scalar>
Tensor<Scalar> operator+(Tensor<Scalar> a, const Tensor<Scalar>& b) {
  return add(std::move(a), b);
}
template <typename Scalar>
Tensor<Scalar> operator-(Tensor<Scalar> a, const Tensor<Scalar>& b) {
  return subtract(std::move(a), b);
}
template <typename Scalar>
Tensor<Scalar> operator-(Tensor<Scalar> a) {
  a *= Scalar(-1);
  return a;
}
template <typename Scalar>
Tensor<Scalar> operator*(const Scalar& alpha, Tensor<Scalar> a) {
  return scale(alpha, std::move(a));
}

/// Elementwise complex conjugate.
template <typename Scalar>
Tensor<Scalar> conj(Tensor<Scalar> a) {
  for (auto& v : a.data()) v = detail::conj(v);
  return a;
}

/// Entrywise p-norm; p = +inf gives the largest magnitude.
template <typename Scalar>
typename Tensor<Scalar>::RealScalar p_norm(const Tensor<Scalar>& a, double p) {
  using std::abs;
  using Real = typename Tensor<Scalar>::RealScalar;
  if (std::isnan(p) || p < 1.0) throw std::invalid_argument("p-norm requires p >= 1");
  if (std::isinf(p)) {
    Real m = 0;
    for (const auto& v : a.data()) m = std::max<Real>(m, abs(v));
    return m;
  }
  Real sum = 0;
  if (p == 1.0) {
    for (const auto& v : a.data()) sum += abs(v);
    return sum;
  }
  if (p == 2.0) {
    for (const auto& v : a.data()) sum += Eigen::numext::abs2(v);
    return std::sqrt(sum);
  }
  for (const auto& v : a.data()) sum += std::pow(static_cast<Real>(abs(v)), static_cast<Real>(p));
  return std::pow(sum, static_cast<Real>(1.0 / p));
}

template <typename Scalar>
typename Tensor<Scalar>::RealScalar frobenius_norm(const Tensor<Scalar>& a) {
  return p_norm(a, 2.0);
}

template <typename Scalar>
typename Tensor<Scalar>::RealScalar max_abs(const Tensor<Scalar>& a) {
  return p_norm(a, std::numeric_limits<double>::infinity());
}

/// Conjugated dot product sum_i conj(a_i) b_i. Unlike inner_product this is a
/// proper Hermitian form; conj_dot(a, a) = ||a||_2^2.
template <typename Scalar>
Scalar conj_dot(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("conj_dot shape mismatch: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  Scalar sum(0);
  for (Index i = 0; i < a.size(); ++i) sum += detail::conj(a[i]) * b[i];
  return sum;
}

/// Largest elementwise |a - b|.
template <typename Scalar>
typename Tensor<Scalar>::RealScalar max_abs_diff(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  if (a.shape() != b.shape())
    throw ShapeError("max_abs_diff shape mismatch: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  typename Tensor<Scalar>::RealScalar m = 0;
  for (Index i = 0; i < a.size(); ++i) m = std::max(m, static_cast<decltype(m)>(std::abs(a[i] - b[i])));
  return m;
}

/// Deterministic text dump: the shape line followed by one element per line
/// in storage order, printed with 17 significant digits independent of locale.
template <typename Scalar>
std::string debug_dump(const Tensor<Scalar>& a) {
  std::string out = "shape " + to_string(a.shape()) + "\n";
  for (Index i = 0; i < a.size(); ++i) {
    out += std::to_string(i);
    out += ' ';
    if constexpr (Eigen::NumTraits<Scalar>::IsComplex) {
      detail::append_number(out, a[i].real());
      out += ' ';
      detail::append_number(out, a[i].imag());
    } else {
      detail::append_number(out, static_cast<double>(a[i]));
    }
    out += '\n';
  }
  return out;
}

}  // namespace mlt

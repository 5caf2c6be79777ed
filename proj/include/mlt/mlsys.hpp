#pragma once

#include "mlt/products.hpp"

#include <optional>

namespace mlt {

/// Finite-support sequence of equally shaped tensors indexed by integer time
/// k in [k_min, k_max]. A sample step marks the sequence as a uniformly
/// sampled continuous-time signal.
template <typename Scalar>
class TensorSequence {
 public:
  TensorSequence(Index k_min, std::vector<Tensor<Scalar>> frames, std::optional<double> sample_step = {})
      : k_min_(k_min), frames_(std::move(frames)), step_(sample_step) {
    if (frames_.empty()) throw ShapeError("tensor sequence needs at least one frame");
    for (const auto& f : frames_)
      if (f.shape() != frames_.front().shape()) throw ShapeError("tensor sequence frames must share one shape");
    if (step_ && !(*step_ > 0.0)) throw std::invalid_argument("sample step must be positive");
  }

  /// frame * delta[k - at].
  static TensorSequence impulse(Tensor<Scalar> frame, Index at = 0, std::optional<double> sample_step = {}) {
    std::vector<Tensor<Scalar>> frames;
    frames.push_back(std::move(frame));
    return TensorSequence(at, std::move(frames), sample_step);
  }

  const Shape& frame_shape() const noexcept { return frames_.front().shape(); }
  Index k_min() const noexcept { return k_min_; }
  Index k_max() const noexcept { return k_min_ + length() - 1; }
  Index length() const noexcept { return static_cast<Index>(frames_.size()); }
  bool contains(Index k) const noexcept { return k >= k_min_ && k <= k_max(); }
  std::optional<double> sample_step() const noexcept { return step_; }
  const std::vector<Tensor<Scalar>>& frames() const noexcept { return frames_; }

  /// Frame at time k; k must lie in the support.
  const Tensor<Scalar>& operator[](Index k) const {
    if (!contains(k)) throw std::out_of_range("time index " + std::to_string(k) + " outside support");
    return frames_[static_cast<std::size_t>(k - k_min_)];
  }

  /// Frame at time k, zero outside the support.
  Tensor<Scalar> value_at(Index k) const { return contains(k) ? (*this)[k] : Tensor<Scalar>(frame_shape()); }

  /// The sequence delayed by d samples.
  TensorSequence shifted(Index d) const { return TensorSequence(k_min_ + d, frames_, step_); }

 private:
  Index k_min_;
  std::vector<Tensor<Scalar>> frames_;
  std::optional<double> step_;
};

/// Impulse-response tensor H[k] with frames of shape J_1..J_M x I_1..I_N
/// (output modes first), coupling order-N inputs to order-M outputs.
template <typename Scalar>
class SystemTensor {
 public:
  SystemTensor(TensorSequence<Scalar> impulse_response, Index input_order)
      : h_(std::move(impulse_response)), input_order_(input_order) {
    const auto order = static_cast<Index>(h_.frame_shape().size());
    if (input_order < 0 || input_order > order)
      throw ShapeError("input order " + std::to_string(input_order) + " invalid for frames of order " +
                       std::to_string(order));
    output_order_ = order - input_order;
  }

  const TensorSequence<Scalar>& impulse_response() const noexcept { return h_; }
  Index input_order() const noexcept { return input_order_; }
  Index output_order() const noexcept { return output_order_; }
  Shape output_shape() const { return Shape(h_.frame_shape().begin(), h_.frame_shape().begin() + output_order_); }
  Shape input_shape() const { return Shape(h_.frame_shape().begin() + output_order_, h_.frame_shape().end()); }

 private:
  TensorSequence<Scalar> h_;
  Index input_order_;
  Index output_order_ = 0;
};

namespace detail {
inline std::optional<double> common_step(std::optional<double> a, std::optional<double> b) {
  if (a.has_value() != b.has_value()) throw std::invalid_argument("inconsistent sample step between operands");
  if (a && std::abs(*a - *b) > 1e-12 * std::max(*a, *b))
    throw std::invalid_argument("operands are sampled with different steps");
  return a;
}

template <typename C>
C int_pow(C base, Index e) {
  if (e < 0) return C(1) / int_pow(base, -e);
  C result(1);
  while (e) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}
}  // namespace detail

/// Contracted convolution y[k] = sum_n h[n] *_N x[k - n]. When both operands
/// are sampled with step dt the sum is scaled by dt (Riemann approximation of
/// the continuous convolution integral) and the result keeps the step.
template <typename Scalar>
TensorSequence<Scalar> contracted_convolve(const SystemTensor<Scalar>& h, const TensorSequence<Scalar>& x) {
  if (x.frame_shape() != h.input_shape())
    throw ShapeError("input frames " + to_string(x.frame_shape()) + " do not match system input " +
                     to_string(h.input_shape()));
  const auto step = detail::common_step(h.impulse_response().sample_step(), x.sample_step());
  const auto& hs = h.impulse_response();
  const Index k_lo = hs.k_min() + x.k_min();
  const Index k_hi = hs.k_max() + x.k_max();
  std::vector<Tensor<Scalar>> out;
  out.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
  for (Index k = k_lo; k <= k_hi; ++k) {
    Tensor<Scalar> y(h.output_shape());
    for (Index n = std::max(hs.k_min(), k - x.k_max()); n <= std::min(hs.k_max(), k - x.k_min()); ++n)
      y += einstein_product(hs[n], x[k - n], h.input_order());
    if (step) y *= static_cast<Scalar>(*step);
    out.push_back(std::move(y));
  }
  return TensorSequence<Scalar>(k_lo, std::move(out), step);
}

/// z-transform sum_n x[n] z^{-n} evaluated at one point.
template <typename Real>
Tensor<std::complex<Real>> z_transform_eval(const TensorSequence<std::complex<Real>>& x, std::complex<Real> z) {
  using C = std::complex<Real>;
  if (z == C(0) && x.k_max() > 0) throw std::invalid_argument("z-transform at z = 0 needs negative powers of z");
  Tensor<C> out(x.frame_shape());
  for (Index n = x.k_min(); n <= x.k_max(); ++n) {
    const C w = detail::int_pow(z, -n);
    const auto& f = x[n];
    for (Index i = 0; i < out.size(); ++i) out[i] += f[i] * w;
  }
  return out;
}

/// DTFT: the z-transform on the unit circle at z = e^{j omega}.
template <typename Real>
Tensor<std::complex<Real>> dtft_eval(const TensorSequence<std::complex<Real>>& x, Real omega) {
  return z_transform_eval(x, std::polar(Real(1), omega));
}

/// Fourier transform of a sampled continuous signal, dt * sum_n x(n dt) e^{-j omega n dt}.
template <typename Real>
Tensor<std::complex<Real>> fourier_eval(const TensorSequence<std::complex<Real>>& x, Real omega) {
  if (!x.sample_step()) throw std::invalid_argument("Fourier transform needs a sampled continuous signal");
  const Real dt = static_cast<Real>(*x.sample_step());
  auto out = z_transform_eval(x, std::polar(Real(1), omega * dt));
  out *= std::complex<Real>(dt);
  return out;
}

namespace detail {
template <typename Scalar>
std::vector<double> abs_sums(const SystemTensor<Scalar>& h, bool over_inputs) {
  const Index outputs = shape_size(h.output_shape());
  const Index inputs = shape_size(h.input_shape());
  std::vector<double> sums(static_cast<std::size_t>(over_inputs ? outputs : inputs), 0.0);
  for (const auto& f : h.impulse_response().frames())
    for (Index i = 0; i < inputs; ++i)
      for (Index j = 0; j < outputs; ++j)
        sums[static_cast<std::size_t>(over_inputs ? j : i)] += static_cast<double>(std::abs(f[j + outputs * i]));
  return sums;
}
}  // namespace detail

/// Induced infinity-norm gain of the system: the largest, over output indices
/// j, of sum over input indices i and lags k of |H_{j,i}[k]|. Every input
/// satisfies ||y||_inf <= bibo_statistic_discrete(h) * ||x||_inf, and the
/// bound is attained by a unimodular input aligned with the worst output.
template <typename Scalar>
double bibo_statistic_discrete(const SystemTensor<Scalar>& h) {
  const auto sums = detail::abs_sums(h, true);
  return *std::max_element(sums.begin(), sums.end());
}

/// Absolute-summability statistic max_i sum_j sum_k |H_{j,i}[k]| (largest
/// output-summed mass over input indices). Finite exactly when the gain is
/// finite, but it is not itself an output bound.
template <typename Scalar>
double absolute_summability_statistic(const SystemTensor<Scalar>& h) {
  const auto sums = detail::abs_sums(h, false);
  return *std::max_element(sums.begin(), sums.end());
}

/// Sampled continuous-time gain: dt times the discrete gain sum, the
/// Riemann approximation of the absolute-integral criterion.
template <typename Scalar>
double bibo_statistic_sampled_continuous(const SystemTensor<Scalar>& h) {
  const auto step = h.impulse_response().sample_step();
  if (!step) throw std::invalid_argument("continuous BIBO statistic needs a sample step");
  return *step * bibo_statistic_discrete(h);
}

template <typename Scalar>
bool is_bibo_stable(const SystemTensor<Scalar>& h) {
  return std::isfinite(bibo_statistic_discrete(h));
}

}  // namespace mlt

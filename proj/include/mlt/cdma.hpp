#pragma once

#include "mlt/decomp.hpp"
#include "mlt/random.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace mlt::cdma {

// MIMO-CDMA uplink Y = H Xbar S + Z with K users, n_t transmit antennas per
// user, n_r receive antennas and spreading length L. Symbol x(k,i) sits at
// row/column j = k*n_t + i (0-based) of the stacked matrix model and at
// element (k, i) of the K x n_t input X of the tensor model.

using CMatrix = Matrix<Complex>;

enum class Receiver { lmmse1, lmmse2, tml_mmse };
inline constexpr std::array<Receiver, 3> all_receivers{Receiver::lmmse1, Receiver::lmmse2, Receiver::tml_mmse};
std::string_view receiver_name(Receiver r);

/// Unit-energy Gray-mapped 4-QAM. Point index = 2 bits (b1 b0), b1 selects
/// the sign of the real part and b0 the sign of the imaginary part.
struct Qam4 {
  static constexpr int bits_per_symbol = 2;
  static const std::array<Complex, 4>& points();
  /// Nearest point; ties go to the lowest index.
  static int nearest(Complex z);
};

struct CdmaConfig {
  std::string experiment = "ber_vs_snr";
  Index L = 32;
  Index K = 4;
  Index n_t = 4;
  Index n_r = 32;
  /// SNR axis (Eb/N0 in dB) when user_grid is empty.
  std::vector<double> snr_db_grid{0, 2, 4, 6, 8, 10, 12};
  /// Numbers of users to sweep; when non-empty every K is run at each fixed_snr_db.
  std::vector<Index> user_grid;
  std::vector<double> fixed_snr_db{5, 8};
  double es = 1.0;
  std::uint64_t min_bit_errors = 100;
  std::uint64_t n_channel_realizations = 100;
  Index frames_per_realization = 100;
  std::uint64_t max_bits = 10'000'000;
  std::uint64_t master_seed = 1;

  static CdmaConfig experiment1();
  static CdmaConfig experiment2();

  bool user_sweep() const noexcept { return !user_grid.empty(); }
  /// Throws std::invalid_argument for non-positive counts or an empty sweep.
  void validate() const;
};

/// N0 for Eb/N0 = snr_db with Eb = Es / 2.
double noise_power(double snr_db, double es);

struct ChannelSet {
  DenseTensor h;  // n_r x K x n_t, h(:, k, :) = H^(k)
};

struct SpreadingSet {
  CMatrix s_matrix;      // K*n_t x L, row j is s^(k,i)
  DenseTensor s_tensor;  // K x n_t x L x K x n_t
};

ChannelSet gen_channel(const CdmaConfig& cfg, RandomStream& rng);
SpreadingSet gen_spreading(const CdmaConfig& cfg, RandomStream& rng);

/// H = (H^(1), ..., H^(K)), n_r x K*n_t.
CMatrix stacked_channel(const ChannelSet& ch);

/// Hbar = h *_2 s_tensor, n_r x L x K x n_t.
DenseTensor equivalent_channel(const ChannelSet& ch, const SpreadingSet& sp);

/// Y = hbar *_2 x + Z with Z i.i.d. CN(0, n0).
DenseTensor transmit(const DenseTensor& hbar, const DenseTensor& x, double n0, RandomStream& rng);

enum class AKind { zf, lmmse };
enum class BKind { decor, lmmse };

struct ReceiverPair {
  CMatrix a;  // K*n_t x n_r
  CMatrix b;  // L x K*n_t
};

/// A = (H^H H + sigma I)^-1 H^H and B = S^H (S S^H + sigma I)^-1 with
/// sigma = n0_over_es for the LMMSE variants and 0 for ZF / DECOR. Throws
/// NumericalError when the matrix to invert is singular.
ReceiverPair receiver_matrices(const CMatrix& h_stacked, const CMatrix& s, double n0_over_es, AKind a_kind, BKind b_kind);

/// Soft estimates (A Y B)_{jj} arranged as a K x n_t tensor.
DenseTensor two_stage_estimate(const CMatrix& a, const CMatrix& y, const CMatrix& b, Index K, Index n_t);

/// Nearest-point decisions on two_stage_estimate.
DenseTensor decode_two_stage(const CMatrix& a, const CMatrix& y, const CMatrix& b, Index K, Index n_t);

/// Constellation indices of the nearest points, element by element.
std::vector<int> detect(const DenseTensor& estimate);

enum class TmlForm {
  automatic,     // whichever Gram operator is smaller
  output_space,  // hbar^H *_2 (hbar *_2 hbar^H + sigma I_{n_r,L})^-1
  input_space,   // (hbar^H *_2 hbar + sigma I_{K,n_t})^-1 *_2 hbar^H
};

/// TML MMSE receiver R (K x n_t x n_r x L); the estimate is R *_2 Y.
DenseTensor tml_mmse(const DenseTensor& hbar, double n0_over_es, TmlForm form = TmlForm::automatic);

/// Everything random in one channel realization.
struct Realization {
  ChannelSet channel;
  SpreadingSet spreading;
};

/// Channel and spreading of realization r for the current K. The same
/// (master_seed, dimensions, r) always gives the same draw, at every SNR.
Realization draw_realization(const CdmaConfig& cfg, std::uint64_t r);

struct Tally {
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  std::uint64_t frames = 0;
  double nmse_sum = 0;
  double nmse_sq_sum = 0;

  Tally& operator+=(const Tally& o);
};

using ReceiverTallies = std::array<Tally, all_receivers.size()>;

/// Runs frames_per_realization frames of realization r at one SNR for all
/// three receivers (same symbols and noise for each).
ReceiverTallies simulate_realization(const CdmaConfig& cfg, double snr_db, std::uint64_t r);

struct CdmaRecord {
  std::string experiment;
  Index k = 0;
  double snr_db = 0;
  Receiver receiver = Receiver::tml_mmse;
  double ber = 0;
  double ber_se = 0;
  double nmse = 0;
  double nmse_se = 0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  std::uint64_t realizations = 0;
  std::uint64_t seed = 0;
  bool capped = false;
};

/// One sweep point. Realizations are merged in index order until at least
/// n_channel_realizations are used and every receiver has min_bit_errors
/// errors (or max_bits bits were sent, which sets `capped`). Results do not
/// depend on `threads`.
std::array<CdmaRecord, all_receivers.size()> run_point(const CdmaConfig& cfg, double snr_db, unsigned threads = 1);

/// Full sweep: SNR points in grid order, or for a user sweep every K of
/// user_grid at each fixed SNR (SNR outer, K inner). Three records per point.
std::vector<CdmaRecord> run_monte_carlo(const CdmaConfig& cfg, unsigned threads = 1);

}  // namespace mlt::cdma

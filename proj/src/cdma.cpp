#include "mlt/cdma.hpp"

#include <Eigen/LU>

#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace mlt::cdma {

namespace {

enum Role : std::uint64_t { role_channel = 1, role_spreading = 2, role_symbols = 3, role_noise = 4 };

RandomStream stream(const CdmaConfig& cfg, Role role, std::uint64_t r) {
  return RandomStream(cfg.master_seed, {role, static_cast<std::uint64_t>(cfg.K), static_cast<std::uint64_t>(cfg.n_t),
                                        static_cast<std::uint64_t>(cfg.n_r), static_cast<std::uint64_t>(cfg.L), r});
}

// Below this reciprocal condition number the normal matrices of ZF / DECOR
// are treated as singular.
constexpr double min_rcond = 1e-13;

Eigen::PartialPivLU<CMatrix> checked_lu(const CMatrix& m, const char* what) {
  Eigen::PartialPivLU<CMatrix> lu(m);
  const double rc = lu.rcond();
  if (!(rc > min_rcond)) throw NumericalError(std::string(what) + ": matrix is singular (rcond " + std::to_string(rc) + ")");
  return lu;
}

}  // namespace

std::string_view receiver_name(Receiver r) {
  switch (r) {
    case Receiver::lmmse1: return "LMMSE1";
    case Receiver::lmmse2: return "LMMSE2";
    case Receiver::tml_mmse: return "TML_MMSE";
  }
  return "?";
}

const std::array<Complex, 4>& Qam4::points() {
  static const double a = 1.0 / std::sqrt(2.0);
  static const std::array<Complex, 4> p{Complex(a, a), Complex(a, -a), Complex(-a, a), Complex(-a, -a)};
  return p;
}

int Qam4::nearest(Complex z) {
  const auto& p = points();
  int best = 0;
  double best_d = std::norm(z - p[0]);
  for (int i = 1; i < 4; ++i) {
    const double d = std::norm(z - p[static_cast<std::size_t>(i)]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

CdmaConfig CdmaConfig::experiment1() { return CdmaConfig{}; }

CdmaConfig CdmaConfig::experiment2() {
  CdmaConfig c;
  c.experiment = "ber_vs_users";
  c.L = 64;
  c.n_r = 64;
  c.n_t = 2;
  c.K = 2;
  c.user_grid = {2, 4, 6, 8};
  c.fixed_snr_db = {5, 8};
  return c;
}

void CdmaConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("invalid config: " + msg); };
  if (L < 1 || n_t < 1 || n_r < 1) fail("L, n_t and n_r must be positive");
  if (frames_per_realization < 1) fail("frames_per_realization must be positive");
  if (n_channel_realizations < 1) fail("n_channel_realizations must be positive");
  if (max_bits < 1) fail("max_bits must be positive");
  if (!(es > 0) || !std::isfinite(es)) fail("es must be positive");
  auto check_k = [&](Index k) {
    if (k < 1) fail("K must be positive");
    if (k * n_t > L) fail("K*n_t = " + std::to_string(k * n_t) + " exceeds L = " + std::to_string(L) +
                          "; the decorrelator needs K*n_t <= L");
  };
  const auto& snrs = user_sweep() ? fixed_snr_db : snr_db_grid;
  if (snrs.empty()) fail(user_sweep() ? "fixed_snr_db is empty" : "snr_db_grid is empty");
  for (double s : snrs)
    if (!std::isfinite(s)) fail("SNR values must be finite");
  if (user_sweep())
    for (Index k : user_grid) check_k(k);
  else
    check_k(K);
}

double noise_power(double snr_db, double es) { return es / (2.0 * std::pow(10.0, snr_db / 10.0)); }

ChannelSet gen_channel(const CdmaConfig& cfg, RandomStream& rng) {
  DenseTensor h(Shape{cfg.n_r, cfg.K, cfg.n_t});
  const double var = 1.0 / static_cast<double>(cfg.n_r);
  for (Index i = 0; i < h.size(); ++i) h[i] = rng.complex_normal(var);
  return {std::move(h)};
}

SpreadingSet gen_spreading(const CdmaConfig& cfg, RandomStream& rng) {
  const Index kn = cfg.K * cfg.n_t;
  const double a = 1.0 / std::sqrt(static_cast<double>(cfg.L));
  const std::array<Complex, 4> alphabet{Complex(a, 0), Complex(-a, 0), Complex(0, a), Complex(0, -a)};
  SpreadingSet sp;
  sp.s_matrix.resize(kn, cfg.L);
  for (Index j = 0; j < kn; ++j)
    for (Index l = 0; l < cfg.L; ++l) sp.s_matrix(j, l) = alphabet[rng.below(4)];
  sp.s_tensor = DenseTensor(Shape{cfg.K, cfg.n_t, cfg.L, cfg.K, cfg.n_t});
  for (Index k = 1; k <= cfg.K; ++k)
    for (Index i = 1; i <= cfg.n_t; ++i)
      for (Index l = 1; l <= cfg.L; ++l) sp.s_tensor(k, i, l, k, i) = sp.s_matrix((k - 1) * cfg.n_t + i - 1, l - 1);
  return sp;
}

CMatrix stacked_channel(const ChannelSet& ch) {
  const Index nr = ch.h.dim(1), K = ch.h.dim(2), nt = ch.h.dim(3);
  CMatrix m(nr, K * nt);
  for (Index k = 1; k <= K; ++k)
    for (Index i = 1; i <= nt; ++i)
      for (Index r = 1; r <= nr; ++r) m(r - 1, (k - 1) * nt + i - 1) = ch.h(r, k, i);
  return m;
}

DenseTensor equivalent_channel(const ChannelSet& ch, const SpreadingSet& sp) {
  return einstein_product(ch.h, sp.s_tensor, 2);
}

DenseTensor transmit(const DenseTensor& hbar, const DenseTensor& x, double n0, RandomStream& rng) {
  if (n0 < 0) throw std::invalid_argument("noise power must be non-negative");
  DenseTensor y = einstein_product(hbar, x, 2);
  const double s = std::sqrt(n0);
  for (Index i = 0; i < y.size(); ++i) y[i] += s * rng.complex_normal(1.0);
  return y;
}

ReceiverPair receiver_matrices(const CMatrix& h, const CMatrix& s, double n0_over_es, AKind a_kind, BKind b_kind) {
  if (h.cols() != s.rows())
    throw ShapeError("stacked channel has " + std::to_string(h.cols()) + " columns but S has " +
                     std::to_string(s.rows()) + " rows");
  const Index kn = h.cols();
  const CMatrix eye = CMatrix::Identity(kn, kn);
  const double sa = a_kind == AKind::lmmse ? n0_over_es : 0.0;
  const double sb = b_kind == BKind::lmmse ? n0_over_es : 0.0;
  ReceiverPair p;
  const CMatrix ga = h.adjoint() * h + sa * eye;
  p.a = checked_lu(ga, a_kind == AKind::zf ? "ZF" : "LMMSE A").solve(h.adjoint());
  const CMatrix gb = s * s.adjoint() + sb * eye;
  // S^H M^-1 = (M^-1 S)^H for Hermitian M
  p.b = checked_lu(gb, b_kind == BKind::decor ? "DECOR" : "LMMSE B").solve(s).adjoint();
  return p;
}

DenseTensor two_stage_estimate(const CMatrix& a, const CMatrix& y, const CMatrix& b, Index K, Index n_t) {
  if (a.cols() != y.rows() || y.cols() != b.rows() || a.rows() != K * n_t || b.cols() != K * n_t)
    throw ShapeError("two-stage receiver dimensions do not conform");
  const CMatrix ay = a * y;
  DenseTensor est(Shape{K, n_t});
  for (Index k = 1; k <= K; ++k)
    for (Index i = 1; i <= n_t; ++i) {
      const Index j = (k - 1) * n_t + i - 1;
      est(k, i) = (ay.row(j) * b.col(j)).value();
    }
  return est;
}

DenseTensor decode_two_stage(const CMatrix& a, const CMatrix& y, const CMatrix& b, Index K, Index n_t) {
  DenseTensor est = two_stage_estimate(a, y, b, K, n_t);
  for (Index i = 0; i < est.size(); ++i) est[i] = Qam4::points()[static_cast<std::size_t>(Qam4::nearest(est[i]))];
  return est;
}

std::vector<int> detect(const DenseTensor& estimate) {
  std::vector<int> out(static_cast<std::size_t>(estimate.size()));
  for (Index i = 0; i < estimate.size(); ++i) out[static_cast<std::size_t>(i)] = Qam4::nearest(estimate[i]);
  return out;
}

DenseTensor tml_mmse(const DenseTensor& hbar, double n0_over_es, TmlForm form) {
  if (hbar.order() != 4) throw ShapeError("equivalent channel must be of order 4, got " + to_string(hbar.shape()));
  if (n0_over_es < 0) throw std::invalid_argument("noise-to-signal ratio must be non-negative");
  const Index out_dim = hbar.dim(1) * hbar.dim(2);
  const Index in_dim = hbar.dim(3) * hbar.dim(4);
  if (form == TmlForm::automatic) form = out_dim <= in_dim ? TmlForm::output_space : TmlForm::input_space;
  const DenseTensor hh = hermitian_default(hbar);
  const Complex sigma(n0_over_es);
  if (form == TmlForm::output_space) {
    DenseTensor g = einstein_product(hbar, hh, 2);
    g += sigma * identity_tensor(Shape{hbar.dim(1), hbar.dim(2)});
    return einstein_product(hh, inverse(g), 2);
  }
  DenseTensor g = einstein_product(hh, hbar, 2);
  g += sigma * identity_tensor(Shape{hbar.dim(3), hbar.dim(4)});
  return einstein_product(inverse(g), hh, 2);
}

Realization draw_realization(const CdmaConfig& cfg, std::uint64_t r) {
  auto ch_rng = stream(cfg, role_channel, r);
  auto sp_rng = stream(cfg, role_spreading, r);
  Realization out{gen_channel(cfg, ch_rng), gen_spreading(cfg, sp_rng)};
  return out;
}

Tally& Tally::operator+=(const Tally& o) {
  bits += o.bits;
  errors += o.errors;
  frames += o.frames;
  nmse_sum += o.nmse_sum;
  nmse_sq_sum += o.nmse_sq_sum;
  return *this;
}

ReceiverTallies simulate_realization(const CdmaConfig& cfg, double snr_db, std::uint64_t r) {
  const Realization real = draw_realization(cfg, r);
  const DenseTensor hbar = equivalent_channel(real.channel, real.spreading);
  const double n0 = noise_power(snr_db, cfg.es);
  const double sigma = n0 / cfg.es;
  const Index K = cfg.K, nt = cfg.n_t, kn = K * nt, nr = cfg.n_r, L = cfg.L;

  const DenseTensor rx = tml_mmse(hbar, sigma);
  const auto r_mat = matrix_view(rx, ModePartition::square(4));
  const auto h_mat = matrix_view(hbar, ModePartition::square(4));
  const CMatrix h_stacked = stacked_channel(real.channel);
  const auto p1 = receiver_matrices(h_stacked, real.spreading.s_matrix, sigma, AKind::lmmse, BKind::decor);
  const auto p2 = receiver_matrices(h_stacked, real.spreading.s_matrix, sigma, AKind::lmmse, BKind::lmmse);

  auto sym_rng = stream(cfg, role_symbols, r);
  auto noise_rng = stream(cfg, role_noise, r);
  const double noise_scale = std::sqrt(n0);
  const double norm = 1.0 / static_cast<double>(kn);
  const auto& pts = Qam4::points();

  ReceiverTallies t{};
  std::vector<int> sent(static_cast<std::size_t>(kn));
  DenseTensor x(Shape{K, nt});
  Eigen::VectorXcd y(nr * L);
  DenseTensor est_tml(Shape{K, nt});
  for (Index f = 0; f < cfg.frames_per_realization; ++f) {
    for (Index i = 0; i < kn; ++i) {
      sent[static_cast<std::size_t>(i)] = static_cast<int>(sym_rng.below(4));
      x[i] = pts[static_cast<std::size_t>(sent[static_cast<std::size_t>(i)])];
    }
    y.noalias() = h_mat * x.flat();
    for (Index i = 0; i < y.size(); ++i) y[i] += noise_scale * noise_rng.complex_normal(1.0);
    const CMatrix y_mat = Eigen::Map<const CMatrix>(y.data(), nr, L);
    est_tml.flat().noalias() = r_mat * y;
    const std::array<DenseTensor, 3> ests{two_stage_estimate(p1.a, y_mat, p1.b, K, nt),
                                          two_stage_estimate(p2.a, y_mat, p2.b, K, nt), est_tml};
    for (std::size_t rcv = 0; rcv < ests.size(); ++rcv) {
      const auto decided = detect(ests[rcv]);
      Tally& tr = t[rcv];
      for (std::size_t i = 0; i < decided.size(); ++i)
        tr.errors += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(decided[i] ^ sent[i])));
      tr.bits += static_cast<std::uint64_t>(kn * Qam4::bits_per_symbol);
      tr.frames += 1;
      const double e = (x.flat() - ests[rcv].flat()).squaredNorm() * norm;
      tr.nmse_sum += e;
      tr.nmse_sq_sum += e * e;
    }
  }
  return t;
}

namespace {

bool stop_rule(const CdmaConfig& cfg, const ReceiverTallies& t, std::uint64_t used) {
  if (used < cfg.n_channel_realizations) return false;
  bool errors_met = true;
  for (const auto& x : t) errors_met = errors_met && x.errors >= cfg.min_bit_errors;
  return errors_met || t.front().bits >= cfg.max_bits;
}

void parallel_realizations(const CdmaConfig& cfg, double snr_db, std::uint64_t first,
                           std::vector<ReceiverTallies>& out, unsigned threads) {
  const std::size_t n = out.size();
  if (threads <= 1 || n == 1) {
    for (std::size_t b = 0; b < n; ++b) out[b] = simulate_realization(cfg, snr_db, first + b);
    return;
  }
  std::exception_ptr error;
  std::mutex m;
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < n; b += threads) {
          try {
            out[b] = simulate_realization(cfg, snr_db, first + b);
          } catch (...) {
            const std::lock_guard lock(m);
            if (!error) error = std::current_exception();
          }
        }
      });
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::array<CdmaRecord, all_receivers.size()> run_point(const CdmaConfig& cfg, double snr_db, unsigned threads) {
  const unsigned batch = std::max(1u, threads);
  ReceiverTallies total{};
  std::uint64_t used = 0;
  bool done = false;
  while (!done) {
    std::vector<ReceiverTallies> part(batch);
    parallel_realizations(cfg, snr_db, used, part, batch);
    // ordered merge; speculative realizations past the stop point are dropped
    for (const auto& p : part) {
      for (std::size_t r = 0; r < total.size(); ++r) total[r] += p[r];
      ++used;
      if (stop_rule(cfg, total, used)) {
        done = true;
        break;
      }
    }
  }
  std::array<CdmaRecord, all_receivers.size()> out;
  for (std::size_t r = 0; r < out.size(); ++r) {
    const Tally& t = total[r];
    CdmaRecord& rec = out[r];
    rec.experiment = cfg.experiment;
    rec.k = cfg.K;
    rec.snr_db = snr_db;
    rec.receiver = all_receivers[r];
    rec.bits = t.bits;
    rec.errors = t.errors;
    rec.realizations = used;
    rec.seed = cfg.master_seed;
    rec.capped = t.errors < cfg.min_bit_errors;
    rec.ber = static_cast<double>(t.errors) / static_cast<double>(t.bits);
    rec.ber_se = std::sqrt(rec.ber * (1.0 - rec.ber) / static_cast<double>(t.bits));
    const double f = static_cast<double>(t.frames);
    rec.nmse = t.nmse_sum / f;
    const double var = t.frames > 1 ? std::max(0.0, (t.nmse_sq_sum - f * rec.nmse * rec.nmse) / (f - 1.0)) : 0.0;
    rec.nmse_se = std::sqrt(var / f);
  }
  return out;
}

std::vector<CdmaRecord> run_monte_carlo(const CdmaConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<CdmaRecord> out;
  auto append = [&](const CdmaConfig& c, double snr) {
    const auto recs = run_point(c, snr, threads);
    out.insert(out.end(), recs.begin(), recs.end());
  };
  if (cfg.user_sweep()) {
    for (double snr : cfg.fixed_snr_db)
      for (Index k : cfg.user_grid) {
        CdmaConfig c = cfg;
        c.K = k;
        append(c, snr);
      }
  } else {
    for (double snr : cfg.snr_db_grid) append(cfg, snr);
  }
  return out;
}

}  // namespace mlt::cdma

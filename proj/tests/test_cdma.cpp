#include "support.hpp"

#include "mlt/cdma.hpp"

using namespace mlt;
using namespace mlt::cdma;
using testing::rel_err;

namespace {

CdmaConfig small_config() {
  CdmaConfig c;
  c.K = 2;
  c.n_t = 2;
  c.n_r = 6;
  c.L = 8;
  c.snr_db_grid = {10};
  c.n_channel_realizations = 3;
  c.frames_per_realization = 10;
  c.min_bit_errors = 5;
  c.max_bits = 4000;
  return c;
}

DenseTensor random_symbols(const CdmaConfig& c, RandomStream& rng) {
  DenseTensor x(Shape{c.K, c.n_t});
  for (Index i = 0; i < x.size(); ++i) x[i] = Qam4::points()[rng.below(4)];
  return x;
}

CMatrix random_matrix(Index r, Index c) {
  return to_matrix(testing::rand_tensor({r, c}));
}

}  // namespace

TEST_CASE("constellation") {
  const auto& p = Qam4::points();
  for (const auto& z : p) CHECK(std::norm(z) == doctest::Approx(1.0));
  // Gray labelling: neighbours differ in one bit
  CHECK(p[0].real() > 0);
  CHECK(p[0].imag() > 0);
  CHECK(p[1].imag() < 0);
  CHECK(p[2].real() < 0);
  CHECK(p[3].real() < 0);
  CHECK(p[3].imag() < 0);
  for (int i = 0; i < 4; ++i) CHECK(Qam4::nearest(1.3 * p[static_cast<std::size_t>(i)]) == i);
  CHECK(Qam4::nearest(Complex(0)) == 0);
  CHECK(Qam4::nearest(Complex(-1, 0)) == 2);
  CHECK(noise_power(0, 1) == doctest::Approx(0.5));
  CHECK(noise_power(10, 2) == doctest::Approx(0.1));
}

TEST_CASE("channel and spreading generation") {
  CdmaConfig c;
  c.n_r = 16;
  c.K = 25;
  c.n_t = 25;
  c.L = 625;
  RandomStream rng(7, {1});
  const auto ch = gen_channel(c, rng);
  double s2 = 0;
  Complex mean(0);
  for (Index i = 0; i < ch.h.size(); ++i) {
    s2 += std::norm(ch.h[i]);
    mean += ch.h[i];
  }
  const double n = static_cast<double>(ch.h.size());
  CHECK(ch.h.size() == 10000);
  CHECK(s2 / n == doctest::Approx(1.0 / 16).epsilon(0.05));
  CHECK(std::abs(mean / n) < 0.01);

  const auto small = small_config();
  RandomStream r1(3, {2}), r2(3, {2});
  const auto sp = gen_spreading(small, r1);
  const double a = 1.0 / std::sqrt(8.0);
  for (Index j = 0; j < sp.s_matrix.rows(); ++j)
    for (Index l = 0; l < sp.s_matrix.cols(); ++l) {
      const Complex v = sp.s_matrix(j, l);
      CHECK(std::abs(v) == doctest::Approx(a));
      CHECK((v.real() == 0.0 || v.imag() == 0.0));
    }
  for (Index k = 1; k <= 2; ++k)
    for (Index i = 1; i <= 2; ++i)
      for (Index l = 1; l <= 8; ++l)
        for (Index k2 = 1; k2 <= 2; ++k2)
          for (Index i2 = 1; i2 <= 2; ++i2)
            if (k != k2 || i != i2) CHECK(sp.s_tensor(k, i, l, k2, i2) == Complex(0));
  CHECK(gen_spreading(small, r2).s_tensor == sp.s_tensor);
  CHECK(draw_realization(small, 4).channel.h == draw_realization(small, 4).channel.h);
  CHECK_FALSE(draw_realization(small, 4).channel.h == draw_realization(small, 5).channel.h);
}

TEST_CASE("equivalent channel") {
  SUBCASE("single user, single antenna is rank one") {
    CdmaConfig c = small_config();
    c.K = 1;
    c.n_t = 1;
    const auto real = draw_realization(c, 0);
    const auto hbar = equivalent_channel(real.channel, real.spreading);
    REQUIRE(hbar.shape() == Shape{6, 8, 1, 1});
    for (Index r = 1; r <= 6; ++r)
      for (Index l = 1; l <= 8; ++l)
        CHECK(std::abs(hbar(r, l, 1, 1) - real.channel.h(r, 1, 1) * real.spreading.s_matrix(0, l - 1)) < 1e-15);
  }
  SUBCASE("tensor model matches the matrix pipeline") {
    const auto c = small_config();
    const auto real = draw_realization(c, 1);
    const auto hbar = equivalent_channel(real.channel, real.spreading);
    RandomStream rng(9, {});
    const auto x = random_symbols(c, rng);
    CMatrix xbar = CMatrix::Zero(4, 4);
    for (Index k = 1; k <= 2; ++k)
      for (Index i = 1; i <= 2; ++i) xbar((k - 1) * 2 + i - 1, (k - 1) * 2 + i - 1) = x(k, i);
    const CMatrix want = stacked_channel(real.channel) * xbar * real.spreading.s_matrix;
    CHECK(rel_err(einstein_product(hbar, x, 2), from_matrix(want)) < 1e-13);

    RandomStream quiet(1, {});
    CHECK(rel_err(transmit(hbar, x, 0.0, quiet), from_matrix(want)) < 1e-13);
    CHECK(transmit(hbar, DenseTensor(Shape{2, 2}), 0.0, quiet) == DenseTensor::zeros({6, 8}));
  }
  SUBCASE("zero channel") {
    const auto c = small_config();
    auto real = draw_realization(c, 2);
    real.channel.h = DenseTensor::zeros(real.channel.h.shape());
    CHECK(equivalent_channel(real.channel, real.spreading) == DenseTensor::zeros({6, 8, 2, 2}));
  }
  SUBCASE("noise variance") {
    const auto hbar = DenseTensor::zeros({20, 50, 1, 1});
    RandomStream rng(5, {});
    double p = 0;
    for (int it = 0; it < 10; ++it) p += std::pow(frobenius_norm(transmit(hbar, DenseTensor::zeros({1, 1}), 3.0, rng)), 2);
    CHECK(p / 10000 == doctest::Approx(3.0).epsilon(0.05));
  }
}

TEST_CASE("two-stage receiver matrices") {
  const auto h = random_matrix(6, 4);
  const auto real = draw_realization(small_config(), 3);
  const auto& s = real.spreading.s_matrix;
  const auto zf = receiver_matrices(h, s, 0.1, AKind::zf, BKind::decor);
  CHECK((zf.a * h - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((s * zf.b - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);

  const auto near = receiver_matrices(h, s, 1e-12, AKind::lmmse, BKind::lmmse);
  CHECK((near.a - zf.a).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((near.b - zf.b).cwiseAbs().maxCoeff() < 1e-8);

  const auto mm = receiver_matrices(h, s, 0.5, AKind::lmmse, BKind::lmmse);
  const CMatrix want_a = (h.adjoint() * h + 0.5 * CMatrix::Identity(4, 4)).inverse() * h.adjoint();
  const CMatrix want_b = s.adjoint() * (s * s.adjoint() + 0.5 * CMatrix::Identity(4, 4)).inverse();
  CHECK((mm.a - want_a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((mm.b - want_b).cwiseAbs().maxCoeff() < 1e-12);

  CMatrix rank_def = h;
  rank_def.col(1) = rank_def.col(0);
  CHECK_THROWS_AS(receiver_matrices(rank_def, s, 0.0, AKind::zf, BKind::decor), NumericalError);
  CHECK_THROWS_AS(receiver_matrices(h, random_matrix(3, 8), 0.1, AKind::zf, BKind::decor), ShapeError);
}

TEST_CASE("two-stage decoding") {
  const auto c = small_config();
  const auto real = draw_realization(c, 0);
  const auto hbar = equivalent_channel(real.channel, real.spreading);
  const auto hs = stacked_channel(real.channel);
  const auto zf = receiver_matrices(hs, real.spreading.s_matrix, 0.0, AKind::zf, BKind::decor);
  RandomStream rng(11, {});
  for (int it = 0; it < 10; ++it) {
    const auto x = random_symbols(c, rng);
    RandomStream quiet(0, {});
    const CMatrix y = to_matrix(transmit(hbar, x, 0.0, quiet));
    CHECK(rel_err(two_stage_estimate(zf.a, y, zf.b, 2, 2), x) < 1e-10);
    CHECK(decode_two_stage(zf.a, y, zf.b, 2, 2) == x);
  }
  const auto zero = decode_two_stage(zf.a, CMatrix::Zero(6, 8), zf.b, 2, 2);
  for (Index i = 0; i < zero.size(); ++i) CHECK(zero[i] == Qam4::points()[0]);

  // noisy: decisions agree with an exhaustive nearest-point search, and the
  // estimate agrees with the diagonal of A Y B
  const auto mm = receiver_matrices(hs, real.spreading.s_matrix, 0.3, AKind::lmmse, BKind::lmmse);
  for (int it = 0; it < 20; ++it) {
    const auto x = random_symbols(c, rng);
    const CMatrix y = to_matrix(transmit(hbar, x, 0.3, rng));
    const auto est = two_stage_estimate(mm.a, y, mm.b, 2, 2);
    const CMatrix full = mm.a * y * mm.b;
    const auto dec = detect(est);
    for (Index i = 0; i < est.size(); ++i) {
      const Index k = i % 2, ant = i / 2;
      CHECK(std::abs(est[i] - full(k * 2 + ant, k * 2 + ant)) < 1e-12);
      int best = 0;
      for (int q = 1; q < 4; ++q)
        if (std::abs(est[i] - Qam4::points()[static_cast<std::size_t>(q)]) <
            std::abs(est[i] - Qam4::points()[static_cast<std::size_t>(best)]))
          best = q;
      CHECK(dec[static_cast<std::size_t>(i)] == best);
    }
  }
}

TEST_CASE("tml mmse receiver") {
  const auto c = small_config();
  const auto real = draw_realization(c, 0);
  const auto hbar = equivalent_channel(real.channel, real.spreading);
  const Index in_dim = 4, out_dim = 48;

  const auto r0 = tml_mmse(hbar, 1e-12);
  CHECK(r0.shape() == Shape{2, 2, 6, 8});
  CHECK(rel_err(einstein_product(r0, hbar, 2), identity_tensor({2, 2})) < 1e-9);

  const double sigma = 0.4;
  const auto hm = matrix_view(hbar, {2, 2});
  const CMatrix want =
      (hm.adjoint() * hm + sigma * CMatrix::Identity(in_dim, in_dim)).inverse() * hm.adjoint();
  const auto out_form = tml_mmse(hbar, sigma, TmlForm::output_space);
  const auto in_form = tml_mmse(hbar, sigma, TmlForm::input_space);
  CHECK(rel_err(unfold(out_form, {2, 2}), from_matrix(want)) < 1e-10);
  CHECK(rel_err(in_form, out_form) < 1e-10);
  CHECK(rel_err(tml_mmse(hbar, sigma), in_form) == 0.0);
  CHECK(out_dim > in_dim);

  CHECK(tml_mmse(DenseTensor::zeros({6, 8, 2, 2}), 0.5) == DenseTensor::zeros({2, 2, 6, 8}));
  CHECK_THROWS_AS(tml_mmse(DenseTensor::zeros({6, 8, 2, 2}), 0.0), NumericalError);
  CHECK_THROWS_AS(tml_mmse(testing::rand_tensor({2, 2, 2}), 0.5), ShapeError);
}

TEST_CASE("monte carlo") {
  SUBCASE("noiseless limit") {
    auto c = small_config();
    c.snr_db_grid = {60};
    c.max_bits = 2000;
    for (const auto& rec : run_monte_carlo(c)) {
      CHECK(rec.ber == 0.0);
      CHECK(rec.errors == 0);
      CHECK(rec.capped);
      CHECK(rec.nmse < 1e-4);
      CHECK(rec.bits >= 2000);
    }
  }
  SUBCASE("stop rule and record fields") {
    auto c = small_config();
    c.snr_db_grid = {0, 4};
    const auto recs = run_monte_carlo(c);
    REQUIRE(recs.size() == 6);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const auto& r = recs[i];
      CHECK(r.receiver == all_receivers[i % 3]);
      CHECK(r.snr_db == c.snr_db_grid[i / 3]);
      CHECK(r.realizations >= c.n_channel_realizations);
      CHECK(r.bits == r.realizations * static_cast<std::uint64_t>(c.frames_per_realization * 4 * 2));
      CHECK(r.ber == doctest::Approx(static_cast<double>(r.errors) / static_cast<double>(r.bits)));
      CHECK(r.ber >= 0.0);
      CHECK(r.ber <= 1.0);
      CHECK(r.nmse >= 0.0);
      CHECK(r.capped == (r.errors < c.min_bit_errors));
    }
  }
  SUBCASE("results do not depend on the thread count") {
    auto c = small_config();
    c.snr_db_grid = {2};
    c.n_channel_realizations = 5;
    const auto a = run_point(c, 2, 1), b = run_point(c, 2, 3);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(a[r].errors == b[r].errors);
      CHECK(a[r].bits == b[r].bits);
      CHECK(a[r].nmse == b[r].nmse);
      CHECK(a[r].realizations == b[r].realizations);
    }
  }
  SUBCASE("user sweep layout") {
    auto c = small_config();
    c.user_grid = {1, 2};
    c.fixed_snr_db = {3, 6};
    c.n_channel_realizations = 1;
    c.max_bits = 100;
    const auto recs = run_monte_carlo(c);
    REQUIRE(recs.size() == 12);
    CHECK(recs[0].k == 1);
    CHECK(recs[3].k == 2);
    CHECK(recs[6].snr_db == 6);
  }
  SUBCASE("validation") {
    auto c = small_config();
    c.K = 5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.snr_db_grid.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = small_config();
    c.frames_per_realization = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}

#include "mlt/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <numbers>

namespace mlt::verify {

namespace {

// Advances a 1-based multi-index (first mode fastest); false after the last.
bool next_index(std::vector<Index>& idx, const Shape& shape) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (++idx[k] <= shape[k]) return true;
    idx[k] = 1;
  }
  return false;
}

Index uniform_int(RandomStream& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

Shape concat_shapes(const Shape& x, const Shape& y) {
  Shape s = x;
  s.insert(s.end(), y.begin(), y.end());
  return s;
}

EinsteinFn product_under_test(const Options& o) {
  if (o.einstein) return o.einstein;
  return [](const DenseTensor& a, const DenseTensor& b, Index n) { return einstein_product(a, b, n); };
}

struct Tracker {
  SuiteResult r;
  Tracker(std::string name, double tol) {
    r.name = std::move(name);
    r.tolerance = tol;
  }
  void add(double residual) {
    ++r.instances;
    // NaN must fail the suite
    r.max_residual = std::max(r.max_residual, std::isnan(residual) ? INFINITY : residual);
  }
};

SuiteResult einstein_vs_loop(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {1});
  Tracker t("einstein_vs_loop", 1e-12);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index n = uniform_int(rng, 0, 3);
    const Index p = uniform_int(rng, 0, 6 - n);
    const Index m = uniform_int(rng, 0, 6 - n);
    const Shape common = random_shape(rng, n, 4);
    const auto a = random_tensor(rng, concat_shapes(random_shape(rng, p, 4), common));
    const auto b = random_tensor(rng, concat_shapes(common, random_shape(rng, m, 4)));
    t.add(relative_residual(prod(a, b, n), loop_einstein_product(a, b, n)));
  }
  return t.r;
}

SuiteResult contracted_vs_loop(const Options& o) {
  RandomStream rng(o.seed, {2});
  Tracker t("contracted_vs_loop", 1e-12);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index oa = uniform_int(rng, 1, 6);
    const Index ob = uniform_int(rng, 1, 6);
    const Index n = uniform_int(rng, 0, std::min<Index>({oa, ob, 3}));
    Shape sa = random_shape(rng, oa, 4);
    Shape sb = random_shape(rng, ob, 4);
    std::vector<Index> ma(static_cast<std::size_t>(oa)), mb(static_cast<std::size_t>(ob));
    for (Index k = 0; k < oa; ++k) ma[static_cast<std::size_t>(k)] = k + 1;
    for (Index k = 0; k < ob; ++k) mb[static_cast<std::size_t>(k)] = k + 1;
    // random selection via Fisher-Yates on the stream
    for (std::size_t k = ma.size(); k > 1; --k) std::swap(ma[k - 1], ma[rng.below(k)]);
    for (std::size_t k = mb.size(); k > 1; --k) std::swap(mb[k - 1], mb[rng.below(k)]);
    ModePairing pairing;
    for (Index k = 0; k < n; ++k) {
      pairing.modes_a.push_back(ma[static_cast<std::size_t>(k)]);
      pairing.modes_b.push_back(mb[static_cast<std::size_t>(k)]);
      sb[static_cast<std::size_t>(mb[static_cast<std::size_t>(k)] - 1)] = sa[static_cast<std::size_t>(ma[static_cast<std::size_t>(k)] - 1)];
    }
    const auto a = random_tensor(rng, sa);
    const auto b = random_tensor(rng, sb);
    t.add(relative_residual(contracted_product(a, b, pairing), loop_contracted_product(a, b, pairing)));
  }
  return t.r;
}

SuiteResult unfolding_homomorphism(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {3});
  Tracker t("unfolding_homomorphism", 1e-12);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index n = uniform_int(rng, 1, 3), m = uniform_int(rng, 1, 3), p = uniform_int(rng, 1, 3);
    const Shape rows = random_shape(rng, n, 4), mid = random_shape(rng, m, 4), cols = random_shape(rng, p, 4);
    const auto a = random_tensor(rng, concat_shapes(rows, mid));
    const auto b = random_tensor(rng, concat_shapes(mid, cols));
    const Matrix<Complex> expect = matrix_view(a, {n, m}) * matrix_view(b, {m, p});
    const auto got = unfold(prod(a, b, m), {n, p});
    t.add(relative_residual(got, from_matrix(expect)));
  }
  return t.r;
}

SuiteResult penrose(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {4});
  Tracker t("moore_penrose_conditions", 1e-10);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index n = uniform_int(rng, 1, 3), m = uniform_int(rng, 1, 3);
    const Shape rows = random_shape(rng, n, 3), cols = random_shape(rng, m, 3);
    DenseTensor a = random_tensor(rng, concat_shapes(rows, cols));
    if (it % 3 == 2) {
      // rank-deficient: a = b *_1 c through a single inner mode of size 1 or 2
      const Shape inner{uniform_int(rng, 1, 2)};
      a = prod(random_tensor(rng, concat_shapes(rows, inner)), random_tensor(rng, concat_shapes(inner, cols)), 1);
    }
    const auto x = moore_penrose(a, {n, m});
    const auto ax = prod(a, x, m);
    const auto xa = prod(x, a, n);
    t.add(relative_residual(prod(ax, a, n), a));
    t.add(relative_residual(prod(xa, x, m), x));
    t.add(relative_residual(hermitian_default(ax), ax));
    t.add(relative_residual(hermitian_default(xa), xa));
  }
  return t.r;
}

SuiteResult convolution_theorem(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {5});
  Tracker t("convolution_theorem", 1e-10);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index no = uniform_int(rng, 1, 2), ni = uniform_int(rng, 1, 2);
    const Shape out_shape = random_shape(rng, no, 3), in_shape = random_shape(rng, ni, 3);
    std::vector<DenseTensor> hf, xf;
    for (Index k = uniform_int(rng, 1, 5); k > 0; --k) hf.push_back(random_tensor(rng, concat_shapes(out_shape, in_shape)));
    for (Index k = uniform_int(rng, 1, 6); k > 0; --k) xf.push_back(random_tensor(rng, in_shape));
    const SystemTensor<Complex> h(TensorSequence<Complex>(uniform_int(rng, -2, 2), std::move(hf)), ni);
    const TensorSequence<Complex> x(uniform_int(rng, -2, 2), std::move(xf));
    const auto y = contracted_convolve(h, x);
    for (int q = 0; q < 8; ++q) {
      const double w = 2.0 * std::numbers::pi * q / 8.0 + 0.3;
      t.add(relative_residual(dtft_eval(y, w), prod(dtft_eval(h.impulse_response(), w), dtft_eval(x, w), ni)));
    }
  }
  return t.r;
}

SuiteResult svd_reconstruction(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {6});
  Tracker t("svd_reconstruction", 1e-10);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index n = uniform_int(rng, 1, 3), m = uniform_int(rng, 1, 3);
    const auto a = random_tensor(rng, concat_shapes(random_shape(rng, n, 3), random_shape(rng, m, 3)));
    const auto s = svd(a, {n, m});
    t.add(relative_residual(prod(prod(s.u, s.d, n), hermitian_default(s.v), m), a));
  }
  return t.r;
}

SuiteResult evd_reconstruction(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {7});
  Tracker t("hermitian_evd_reconstruction", 1e-10);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index n = uniform_int(rng, 1, 3);
    const Shape rows = random_shape(rng, n, 3);
    const auto b = random_tensor(rng, concat_shapes(rows, rows));
    const auto a = b + hermitian_default(b);
    const auto e = evd_hermitian(a);
    t.add(relative_residual(prod(prod(e.u, e.d, n), hermitian_default(e.u), n), a));
  }
  return t.r;
}

SuiteResult lu_reconstruction(const Options& o, const EinsteinFn& prod) {
  RandomStream rng(o.seed, {8});
  Tracker t("lu_reconstruction", 1e-10);
  for (std::size_t it = 0; it < o.instances; ++it) {
    const Index n = uniform_int(rng, 1, 3);
    const Shape rows = random_shape(rng, n, 3);
    auto a = random_tensor(rng, concat_shapes(rows, rows));
    // diagonal shift keeps every leading minor away from zero
    a += Complex(2.0 * static_cast<double>(shape_size(rows))) * identity_tensor(rows);
    const auto f = lu(a);
    t.add(relative_residual(prod(f.l, f.u, n), a));
  }
  return t.r;
}

}  // namespace

DenseTensor random_tensor(RandomStream& rng, const Shape& shape) {
  DenseTensor t(shape);
  for (Index i = 0; i < t.size(); ++i) t[i] = rng.complex_normal(1.0);
  return t;
}

Shape random_shape(RandomStream& rng, Index order, Index max_dim) {
  Shape s;
  for (Index k = 0; k < order; ++k) s.push_back(uniform_int(rng, 1, max_dim));
  return s;
}

DenseTensor loop_contracted_product(const DenseTensor& a, const DenseTensor& b, const ModePairing& pairing) {
  const std::size_t n = pairing.modes_a.size();
  if (pairing.modes_b.size() != n) throw ShapeError("pairing lengths differ");
  std::vector<bool> used_a(static_cast<std::size_t>(a.order()), false), used_b(static_cast<std::size_t>(b.order()), false);
  Shape con_shape;
  for (std::size_t c = 0; c < n; ++c) {
    const Index ma = pairing.modes_a[c], mb = pairing.modes_b[c];
    if (a.dim(ma) != b.dim(mb)) throw ShapeError("paired sizes differ");
    used_a[static_cast<std::size_t>(ma - 1)] = true;
    used_b[static_cast<std::size_t>(mb - 1)] = true;
    con_shape.push_back(a.dim(ma));
  }
  std::vector<Index> free_a, free_b;
  Shape out_shape;
  for (Index k = 1; k <= a.order(); ++k)
    if (!used_a[static_cast<std::size_t>(k - 1)]) {
      free_a.push_back(k);
      out_shape.push_back(a.dim(k));
    }
  for (Index k = 1; k <= b.order(); ++k)
    if (!used_b[static_cast<std::size_t>(k - 1)]) {
      free_b.push_back(k);
      out_shape.push_back(b.dim(k));
    }
  DenseTensor out(out_shape);
  std::vector<Index> oi(out_shape.size(), 1);
  std::vector<Index> ia(static_cast<std::size_t>(a.order())), ib(static_cast<std::size_t>(b.order()));
  do {
    for (std::size_t p = 0; p < free_a.size(); ++p) ia[static_cast<std::size_t>(free_a[p] - 1)] = oi[p];
    for (std::size_t q = 0; q < free_b.size(); ++q) ib[static_cast<std::size_t>(free_b[q] - 1)] = oi[free_a.size() + q];
    Complex sum(0);
    std::vector<Index> ci(n, 1);
    do {
      for (std::size_t c = 0; c < n; ++c) {
        ia[static_cast<std::size_t>(pairing.modes_a[c] - 1)] = ci[c];
        ib[static_cast<std::size_t>(pairing.modes_b[c] - 1)] = ci[c];
      }
      sum += a.at(ia) * b.at(ib);
    } while (next_index(ci, con_shape));
    out.at(oi) = sum;
  } while (next_index(oi, out_shape));
  return out;
}

DenseTensor loop_einstein_product(const DenseTensor& a, const DenseTensor& b, Index n) {
  ModePairing p;
  for (Index k = 1; k <= n; ++k) {
    p.modes_a.push_back(a.order() - n + k);
    p.modes_b.push_back(k);
  }
  return loop_contracted_product(a, b, p);
}

double relative_residual(const DenseTensor& x, const DenseTensor& y) {
  if (x.shape() != y.shape()) return INFINITY;
  const double scale = std::max(static_cast<double>(max_abs(y)), 1e-300);
  return static_cast<double>(max_abs_diff(x, y)) / scale;
}

DenseTensor corrupted_einstein_product(const DenseTensor& a, const DenseTensor& b, Index n) {
  DenseTensor r = einstein_product(a, b, n);
  r[r.size() / 2] += Complex(1e-3 * (1.0 + static_cast<double>(max_abs(r))));
  return r;
}

std::vector<SuiteResult> run_all(const Options& options) {
  const auto prod = product_under_test(options);
  return {einstein_vs_loop(options, prod),       contracted_vs_loop(options),
          unfolding_homomorphism(options, prod), penrose(options, prod),
          convolution_theorem(options, prod),    svd_reconstruction(options, prod),
          evd_reconstruction(options, prod),     lu_reconstruction(options, prod)};
}

std::string format_report(const std::vector<SuiteResult>& results) {
  std::string out;
  char line[160];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-28s instances=%-4zu max_residual=%.3e tol=%.0e %s\n", r.name.c_str(), r.instances,
                  r.max_residual, r.tolerance, r.passed() ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace mlt::verify

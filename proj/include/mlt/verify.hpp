#pragma once

#include "mlt/decomp.hpp"
#include "mlt/mlsys.hpp"
#include "mlt/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mlt::verify {

/// Random tensor with i.i.d. CN(0, 1) entries.
DenseTensor random_tensor(RandomStream& rng, const Shape& shape);

/// Random shape with `order` modes of size 1..max_dim.
Shape random_shape(RandomStream& rng, Index order, Index max_dim);

/// Contracted product by explicit nested loops over 1-based multi-indices.
/// Shares no code with the offset-table kernel.
DenseTensor loop_contracted_product(const DenseTensor& a, const DenseTensor& b, const ModePairing& pairing);

/// Einstein product through loop_contracted_product.
DenseTensor loop_einstein_product(const DenseTensor& a, const DenseTensor& b, Index n);

/// Relative residual max|x - y| / max(max|y|, tiny).
double relative_residual(const DenseTensor& x, const DenseTensor& y);

using EinsteinFn = std::function<DenseTensor(const DenseTensor&, const DenseTensor&, Index)>;

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  double max_residual = 0;
  double tolerance = 0;
  bool passed() const { return max_residual <= tolerance; }
};

struct Options {
  std::uint64_t seed = 20240601;
  std::size_t instances = 50;
  /// Product under test; defaults to mlt::einstein_product.
  EinsteinFn einstein;
};

/// Runs every oracle suite: einstein vs loop, unfolding homomorphism, Penrose conditions,
/// convolution theorem, SVD / EVD / LU reconstructions.
std::vector<SuiteResult> run_all(const Options& options);

/// One line per suite: name, instances, max residual, tolerance, PASS/FAIL.
std::string format_report(const std::vector<SuiteResult>& results);

/// einstein_product with one output element perturbed, for mutation checks.
DenseTensor corrupted_einstein_product(const DenseTensor& a, const DenseTensor& b, Index n);

}  // namespace mlt::verify

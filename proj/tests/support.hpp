#pragma once

#include "oracles.hpp"

#include <doctest.h>

namespace testing {

inline double rel_err(const DenseTensor& x, const DenseTensor& y) {
  REQUIRE(x.shape() == y.shape());
  double scale = 0, err = 0;
  for (Index i = 0; i < x.size(); ++i) {
    scale = std::max(scale, std::abs(y[i]));
    err = std::max(err, std::abs(x[i] - y[i]));
  }
  return err / std::max(scale, 1e-300);
}

inline double abs_err(const DenseTensor& x, const DenseTensor& y) {
  REQUIRE(x.shape() == y.shape());
  double err = 0;
  for (Index i = 0; i < x.size(); ++i) err = std::max(err, std::abs(x[i] - y[i]));
  return err;
}

}  // namespace testing

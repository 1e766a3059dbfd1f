#pragma once

#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "nctorus/nctorus.hpp"

namespace nctorus::testing {

inline const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

inline TruncationPolicy exact_policy(int radius = 40) { return {radius, 1e-300, GrowthMode::grow_exact}; }

inline ::testing::AssertionResult near_element(const TorusElement& a, const TorusElement& b, double tol) {
  const double d = max_abs_diff(a, b);
  if (d <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "max coefficient difference " << d << " exceeds " << tol;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace nctorus::testing

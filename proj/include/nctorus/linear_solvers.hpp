#pragma once

// Fourier-multiplier solvers for Helmholtz, Poisson and Cauchy-Riemann
// problems, and the singular-value scan for dbar u = f u.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nctorus/element.hpp"
#include "nctorus/parallel.hpp"

namespace nctorus {

/// (-Lap + lambda)^{-1}, lambda > 0.
inline TorusElement solve_helmholtz(const TorusElement& f, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("Helmholtz parameter must be positive");
  return detail::multiplier(f, [lambda](int m, int n) {
    return cplx(1.0 / (kFourPiSq * (static_cast<double>(m) * m + static_cast<double>(n) * n) + lambda));
  });
}

/// Trace-zero solution of Lap u = f. Requires |trace(f)| < tol.
inline TorusElement solve_poisson(const TorusElement& f, double tol = 1e-12) {
  if (std::abs(trace(f)) >= tol)
    throw NoSolution("Poisson right-hand side must have zero trace");
  return detail::multiplier(f, [](int m, int n) {
    if (m == 0 && n == 0) return cplx{};
    return cplx(-1.0 / (kFourPiSq * (static_cast<double>(m) * m + static_cast<double>(n) * n)));
  });
}

/// Trace-zero solution of dbar u = f. Requires |trace(f)| < tol.
inline TorusElement solve_dbar(const TorusElement& f, double tol = 1e-12) {
  if (std::abs(trace(f)) >= tol)
    throw NoSolution("dbar right-hand side must have zero trace");
  return detail::multiplier(f, [](int m, int n) {
    if (m == 0 && n == 0) return cplx{};
    return 1.0 / (cplx(0.0, kPi) * cplx(m, n));
  });
}

/// |trace(dbar f)|; the multiplier vanishes at (0,0), so this is zero.
inline double constant_term_check(const TorusElement& f) { return std::abs(trace(dbar(f))); }

// ---------------------------------------------------------------------------
// Kernel scan for L_f u = dbar u - f u on the coefficient ball of a radius.

struct KernelScanOptions {
  int smallest_count = 8;          ///< how many singular values to return
  double relative_threshold = 1e-8;  ///< kernel threshold as a fraction of ||L_f||
};

struct KernelScan {
  std::vector<double> singular_values;  ///< smallest ones, ascending
  int kernel_dim_estimate = 0;
  double operator_norm = 0.0;
  /// Largest l2 mass a basis vector's image loses to the ball projection.
  double projection_leak = 0.0;
};

namespace detail {

inline int ball_index(int m, int n, int radius) { return (m + radius) * (2 * radius + 1) + (n + radius); }

/// Matrix of u -> dbar u - f u on span{U^k V^l : max(|k|,|l|) <= radius}.
inline Eigen::MatrixXcd cr_operator(const TorusElement& f, int radius, double* leak) {
  const int w = 2 * radius + 1;
  const int dim = w * w;
  Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
  double worst = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    for (int l = -radius; l <= radius; ++l) {
      const int col = ball_index(k, l, radius);
      op(col, col) += cplx(0.0, kPi) * cplx(k, l);
      double lost = 0.0;
      // (c U^m V^n)(U^k V^l) = c e^{-2 pi i k n theta} U^{m+k} V^{n+l}
      f.for_each_nonzero([&](int m, int n, cplx c) {
        const cplx v = c * unit_phase(-static_cast<long long>(k) * n, f.theta());
        const int p = m + k, q = n + l;
        if (std::abs(p) > radius || std::abs(q) > radius)
          lost += std::norm(v);
        else
          op(ball_index(p, q, radius), col) -= v;
      });
      worst = std::max(worst, std::sqrt(lost));
    }
  }
  if (leak) *leak = worst;
  return op;
}

inline KernelScan summarize_singular_values(const Eigen::VectorXd& descending,
                                            const KernelScanOptions& opts) {
  KernelScan out;
  const Eigen::Index n = descending.size();
  out.operator_norm = n > 0 ? descending(0) : 0.0;
  const double threshold = opts.relative_threshold * out.operator_norm;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (static_cast<int>(out.singular_values.size()) < opts.smallest_count)
      out.singular_values.push_back(descending(i));
    if (descending(i) < threshold) ++out.kernel_dim_estimate;
  }
  return out;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXcd& m) {
  // Jacobi keeps high relative accuracy for the tiny singular values.
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
}

}  // namespace detail

inline KernelScan cr_kernel_scan(const TorusElement& f, int radius, const KernelScanOptions& opts = {}) {
  if (radius < 1) throw DomainError("kernel scan radius must be positive");
  double leak = 0.0;
  const Eigen::MatrixXcd op = detail::cr_operator(f, radius, &leak);
  KernelScan out = detail::summarize_singular_values(detail::singular_values(op), opts);
  out.projection_leak = leak;
  return out;
}

/// One grid point of a constant-shift scan f = f0 + c 1.
struct ScanPoint {
  cplx trace_f;
  double sigma_min = 0.0;
  int kernel_dim_estimate = 0;
};

/// Scans f = f0 + c 1 with c = pi i (x + i y) over a rectangle of lattice
/// coordinates (x, y); integer (x, y) are the predicted kernel points.
struct ScanRectangle {
  double x_min = -2.0, x_max = 2.0;
  double y_min = -2.0, y_max = 2.0;
  int x_count = 41, y_count = 41;
};

inline double scan_coordinate(double lo, double hi, int count, int i) {
  if (count == 1) return lo;
  // exact at the endpoints and at integers for symmetric decimal grids
  return (lo * (count - 1 - i) + hi * i) / (count - 1);
}

inline std::vector<ScanPoint> cr_kernel_grid(const TorusElement& f0, int radius, const ScanRectangle& rect,
                                             const KernelScanOptions& opts = {}) {
  if (radius < 1) throw DomainError("kernel scan radius must be positive");
  if (rect.x_count < 1 || rect.y_count < 1) throw DomainError("scan grid counts must be positive");
  const Eigen::MatrixXcd base = detail::cr_operator(f0, radius, nullptr);
  const std::size_t total = static_cast<std::size_t>(rect.x_count) * rect.y_count;
  std::vector<ScanPoint> out(total);
  parallel_for(total, [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / rect.y_count;
    const int j = static_cast<int>(idx) % rect.y_count;
    const double x = scan_coordinate(rect.x_min, rect.x_max, rect.x_count, i);
    const double y = scan_coordinate(rect.y_min, rect.y_max, rect.y_count, j);
    const cplx c = cplx(0.0, kPi) * cplx(x, y);
    Eigen::MatrixXcd op = base;
    op.diagonal().array() -= c;
    const KernelScan s = detail::summarize_singular_values(detail::singular_values(op), opts);
    out[idx] = {trace(f0) + c, s.singular_values.empty() ? 0.0 : s.singular_values.front(),
                s.kernel_dim_estimate};
  });
  return out;
}

}  // namespace nctorus

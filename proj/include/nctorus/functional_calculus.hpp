#pragma once

// Exponentials, their Frechet derivatives and inverses inside the truncated
// l1 algebra. All remainder control uses l1 bounds, which are computable
// exactly from the coefficients and submultiplicative.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <utility>

#include "nctorus/element.hpp"
#include "nctorus/representation.hpp"

namespace nctorus {

namespace detail {

/// Number of halvings bringing the l1 norm to at most 1.
inline int scaling_exponent(double l1) {
  return l1 > 1.0 ? static_cast<int>(std::ceil(std::log2(l1))) : 0;
}

/// sum_{k > K} beta^k / k! given the last included term beta^K / K!.
inline double exp_series_remainder(double beta, int K, double last_term) {
  const double next = last_term * beta / (K + 1);
  const double ratio = beta / (K + 2);
  return ratio < 1.0 ? next / (1.0 - ratio) : std::numeric_limits<double>::infinity();
}

inline constexpr int kMaxSeriesTerms = 400;

}  // namespace detail

/// exp(a) by scaling and squaring. The Taylor series of a/2^s is summed until
/// its l1 remainder bound drops below tol 2^{-s}; the remainder, propagated
/// through the squarings, is added to the tail mass.
inline TorusElement exp_element(const TorusElement& a, const TruncationPolicy& policy, double tol) {
  if (!(tol > 0.0)) throw DomainError("exp tolerance must be positive");
  const int s = detail::scaling_exponent(l1_norm(a));
  const double scale = std::ldexp(1.0, -s);
  const TorusElement b = scale * a;
  const double beta = l1_norm(b);

  TorusElement sum = identity(a.theta());
  TorusElement term = identity(a.theta());
  double bound = 1.0;  // beta^k / k!
  int k = 0;
  while (detail::exp_series_remainder(beta, k, bound) >= tol * scale) {
    if (++k > detail::kMaxSeriesTerms) throw ConditioningError("exp series did not converge");
    term = (1.0 / k) * twisted_mul(term, b, policy);
    sum = sum + term;
    bound *= beta / k;
  }
  double err = detail::exp_series_remainder(beta, k, bound);
  double norm = std::exp(beta);
  for (int i = 0; i < s; ++i) {
    sum = twisted_mul(sum, sum, policy);
    err *= 2.0 * norm + err;
    norm *= norm;
  }
  sum.add_tail_mass(err);
  return sum;
}

/// exp(u) together with its directional derivative
///   dexp(u)[h] = sum_{n>=1} 1/n! sum_{k=0}^{n-1} u^k h u^{n-1-k},
/// computed as the exponential of the dual element (u, h) with
/// (X1, Y1)(X2, Y2) = (X1 X2, X1 Y2 + Y1 X2).
struct ExpDerivative {
  TorusElement value;
  TorusElement derivative;
};

inline ExpDerivative exp_with_derivative(const TorusElement& u, const TorusElement& h,
                                         const TruncationPolicy& policy, double tol) {
  require_same_theta(u, h);
  if (!(tol > 0.0)) throw DomainError("exp tolerance must be positive");
  const int s = detail::scaling_exponent(l1_norm(u));
  const double scale = std::ldexp(1.0, -s);
  const TorusElement b = scale * u;
  const TorusElement g = scale * h;
  const double beta = l1_norm(b);
  const double gamma = l1_norm(g);

  TorusElement sx = identity(u.theta());
  TorusElement sy(u.theta(), 0);
  TorusElement tx = identity(u.theta());
  TorusElement ty(u.theta(), 0);
  double bound = 1.0;  // beta^k / k!
  int k = 0;
  // X remainder: sum_{n>K} beta^n/n!; Y remainder: gamma sum_{j>=K} beta^j/j!
  auto remainders = [&] {
    const double rx = detail::exp_series_remainder(beta, k, bound);
    return std::pair{rx, gamma * (bound + rx)};
  };
  for (;;) {
    const auto [rx, ry] = remainders();
    if (std::max(rx, ry) < tol * scale) break;
    if (++k > detail::kMaxSeriesTerms) throw ConditioningError("dexp series did not converge");
    TorusElement nx = twisted_mul(tx, b, policy);
    TorusElement ny = twisted_mul(tx, g, policy) + twisted_mul(ty, b, policy);
    tx = (1.0 / k) * nx;
    ty = (1.0 / k) * ny;
    sx = sx + tx;
    sy = sy + ty;
    bound *= beta / k;
  }
  auto [ex, ey] = remainders();
  double nx = std::exp(beta);
  double ny = gamma * std::exp(beta);
  for (int i = 0; i < s; ++i) {
    TorusElement x2 = twisted_mul(sx, sx, policy);
    TorusElement y2 = twisted_mul(sx, sy, policy) + twisted_mul(sy, sx, policy);
    sx = std::move(x2);
    sy = std::move(y2);
    ey = 2.0 * (ex * (ny + ey) + nx * ey);
    ny = 2.0 * nx * ny;
    ex *= 2.0 * nx + ex;
    nx *= nx;
  }
  sx.add_tail_mass(ex);
  sy.add_tail_mass(ey);
  return {std::move(sx), std::move(sy)};
}

inline TorusElement dexp(const TorusElement& u, const TorusElement& h,
                         const TruncationPolicy& policy, double tol) {
  return exp_with_derivative(u, h, policy, tol).derivative;
}

// ---------------------------------------------------------------------------
// Inversion through the self-adjoint case: x = a* a, x^{-1} by a Neumann
// series in 1 - x/c with c >= ||x||, then a^{-1} = x^{-1} a*.

struct InvertOptions {
  int phase_grid = 8;
  double min_margin = 1e-8;  ///< smallest admissible singular value of rep(a)
  int max_terms = 20000;
  int divergence_window = 64;  ///< consecutive non-decreasing terms before giving up
  int max_radius_cap = 0;      ///< > policy.max_radius enables radius doubling on failure
};

struct InverseResult {
  TorusElement value;
  double residual_l1 = 0.0;  ///< l1(a * value - 1), untruncated product
  double margin = 0.0;       ///< min singular value seen in the representations
  int neumann_terms = 0;
  int radius_used = 0;
};

namespace detail {

inline InverseResult invert_at(const TorusElement& a, const TruncationPolicy& policy, double tol,
                               const InvertOptions& opts, double margin) {
  const TorusElement a_star = adjoint(a);
  const TorusElement x = twisted_mul(a_star, a, policy);
  const double c = l1_norm(x);
  const TorusElement y = identity(a.theta()) - (1.0 / c) * x;
  const double target = tol * c / std::max(1.0, l1_norm(a_star));

  TorusElement sum = identity(a.theta());
  TorusElement term = identity(a.theta());
  std::deque<double> ratios;
  double prev = 1.0;
  int growing = 0;
  int k = 0;
  for (;;) {
    if (++k > opts.max_terms)
      throw ConditioningError("Neumann series for a*a did not reach tolerance within " +
                              std::to_string(opts.max_terms) + " terms; increase the radius");
    term = twisted_mul(term, y, policy);
    sum = sum + term;
    const double t = l1_norm(term);
    const double ratio = prev > 0.0 ? t / prev : 0.0;
    prev = t;
    growing = ratio >= 1.0 ? growing + 1 : 0;
    if (growing >= opts.divergence_window)
      throw ConditioningError("Neumann series for a*a is not contracting in l1; increase the radius");
    ratios.push_back(ratio);
    if (ratios.size() > 8) ratios.pop_front();
    const double r = *std::max_element(ratios.begin(), ratios.end());
    if (t == 0.0) break;
    if (r < 1.0 && t * r / (1.0 - r) < 0.1 * target) break;
  }
  TorusElement x_inv = (1.0 / c) * sum;
  TorusElement inv = twisted_mul(x_inv, a_star, policy);

  TorusElement residual = exact_mul(a, inv) - identity(a.theta());
  InverseResult out{std::move(inv), l1_norm(residual), margin, k, policy.max_radius};
  return out;
}

}  // namespace detail

inline InverseResult invert(const TorusElement& a, const RationalApproximant& approx,
                            const TruncationPolicy& policy, double tol,
                            const InvertOptions& opts = {}) {
  if (!(tol > 0.0)) throw DomainError("inversion tolerance must be positive");
  const double margin = min_singular_value(a, approx, opts.phase_grid);
  if (!(margin >= opts.min_margin))
    throw NotInvertible("smallest singular value " + std::to_string(margin) +
                        " of the representations is below the invertibility margin");
  TruncationPolicy p = policy;
  for (;;) {
    try {
      return detail::invert_at(a, p, tol, opts, margin);
    } catch (const ConditioningError&) {
      if (2 * p.max_radius > opts.max_radius_cap) throw;
    } catch (const TruncationOverflow& e) {
      if (2 * p.max_radius > opts.max_radius_cap)
        throw ConditioningError("Neumann series for a*a outgrew radius " + std::to_string(p.max_radius) +
                                " (" + e.what() + "); increase the radius");
    }
    p.max_radius *= 2;
  }
}

}  // namespace nctorus

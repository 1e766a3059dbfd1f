#pragma once

// Truncated smooth noncommutative torus: elements are finite Fourier series
//   a = sum c_{m,n} U^m V^n,   UV = e^{2 pi i theta} VU,
// stored densely on the square [-R, R]^2.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nctorus/errors.hpp"

namespace nctorus {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

enum class GrowthMode { grow_exact, project };

struct TruncationPolicy {
  int max_radius = 16;
  double tail_tol = 1e-10;
  GrowthMode growth_mode = GrowthMode::grow_exact;

  void validate() const {
    if (max_radius < 1) throw DomainError("truncation policy: max_radius must be >= 1");
    if (!(tail_tol > 0.0)) throw DomainError("truncation policy: tail_tol must be > 0");
  }
};

inline void check_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw DomainError("theta must lie in the open interval (0,1)");
}

/// e^{2 pi i k theta}. The product k*theta is formed and reduced mod 1 in
/// extended precision before the trigonometric evaluation.
inline cplx unit_phase(long long k, double theta) {
  long double x = static_cast<long double>(k) * static_cast<long double>(theta);
  x -= std::nearbyintl(x);
  const long double angle = 2.0L * std::numbers::pi_v<long double> * x;
  return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

class TorusElement {
 public:
  /// Zero element of the given support radius.
  TorusElement(double theta, int radius) : theta_(theta), radius_(radius) {
    check_theta(theta);
    if (radius < 0) throw DomainError("support radius must be nonnegative");
    coeffs_.assign(static_cast<std::size_t>(width()) * width(), cplx{});
  }

  double theta() const noexcept { return theta_; }
  int radius() const noexcept { return radius_; }
  int width() const noexcept { return 2 * radius_ + 1; }
  double tail_mass() const noexcept { return tail_mass_; }

  cplx coeff(int m, int n) const noexcept {
    if (std::abs(m) > radius_ || std::abs(n) > radius_) return {};
    return coeffs_[index(m, n)];
  }

  /// Unchecked access; requires max(|m|,|n|) <= radius().
  cplx& ref(int m, int n) noexcept { return coeffs_[index(m, n)]; }
  const cplx& ref(int m, int n) const noexcept { return coeffs_[index(m, n)]; }

  /// Sets a coefficient, enlarging the support radius if needed.
  void set(int m, int n, cplx c) {
    const int need = std::max(std::abs(m), std::abs(n));
    if (need > radius_) resize(need);
    ref(m, n) = c;
  }

  std::span<const cplx> data() const noexcept { return coeffs_; }
  std::span<cplx> data() noexcept { return coeffs_; }

  void add_tail_mass(double mass) {
    if (mass < 0.0) throw DomainError("tail mass increments must be nonnegative");
    tail_mass_ += mass;
  }

  /// Pads with zeros (r >= radius) or cuts the outer shells (r < radius).
  /// Returns the l1 mass that was cut; it is added to tail_mass.
  double resize(int r) {
    if (r < 0) throw DomainError("support radius must be nonnegative");
    if (r == radius_) return 0.0;
    TorusElement out(theta_, r);
    double discarded = 0.0;
    for_each([&](int m, int n, cplx c) {
      if (std::abs(m) <= r && std::abs(n) <= r)
        out.ref(m, n) = c;
      else
        discarded += std::abs(c);
    });
    radius_ = r;
    coeffs_ = std::move(out.coeffs_);
    tail_mass_ += discarded;
    return discarded;
  }

  /// Calls f(m, n, c) for every stored coefficient, zeros included.
  template <class F>
  void for_each(F&& f) const {
    std::size_t k = 0;
    for (int m = -radius_; m <= radius_; ++m)
      for (int n = -radius_; n <= radius_; ++n) f(m, n, coeffs_[k++]);
  }

  /// Calls f(m, n, c) for every nonzero coefficient.
  template <class F>
  void for_each_nonzero(F&& f) const {
    for_each([&](int m, int n, cplx c) {
      if (c != cplx{}) f(m, n, c);
    });
  }

 private:
  std::size_t index(int m, int n) const noexcept {
    return static_cast<std::size_t>(m + radius_) * static_cast<std::size_t>(width()) +
           static_cast<std::size_t>(n + radius_);
  }

  double theta_;
  int radius_;
  double tail_mass_ = 0.0;
  std::vector<cplx> coeffs_;
};

inline void require_same_theta(const TorusElement& a, const TorusElement& b) {
  if (a.theta() != b.theta())
    throw CompositionError("elements carry different theta values");
}

// ---------------------------------------------------------------------------
// Construction

inline TorusElement monomial(double theta, int m, int n, cplx c = 1.0) {
  TorusElement e(theta, std::max(std::abs(m), std::abs(n)));
  e.ref(m, n) = c;
  return e;
}

inline TorusElement scalar_element(double theta, cplx c) { return monomial(theta, 0, 0, c); }
inline TorusElement identity(double theta) { return monomial(theta, 0, 0, 1.0); }

/// Smallest radius holding every nonzero coefficient.
inline int effective_radius(const TorusElement& a) {
  int r = 0;
  a.for_each_nonzero([&](int m, int n, cplx) { r = std::max({r, std::abs(m), std::abs(n)}); });
  return r;
}

/// Copy of the coefficients with an empty tail ledger; iterative solvers use
/// it to account for the mass discarded in each sweep separately.
inline TorusElement without_tail(const TorusElement& a) {
  TorusElement out(a.theta(), a.radius());
  std::copy(a.data().begin(), a.data().end(), out.data().begin());
  return out;
}

/// Drops outer shells that hold only exact zeros.
inline TorusElement trimmed(TorusElement a) {
  a.resize(effective_radius(a));
  return a;
}

// ---------------------------------------------------------------------------
// Linear structure. Tail masses add.

namespace detail {

template <class F>
TorusElement combine(const TorusElement& a, const TorusElement& b, F op) {
  require_same_theta(a, b);
  TorusElement out(a.theta(), std::max(a.radius(), b.radius()));
  const int r = out.radius();
  for (int m = -r; m <= r; ++m)
    for (int n = -r; n <= r; ++n) out.ref(m, n) = op(a.coeff(m, n), b.coeff(m, n));
  out.add_tail_mass(a.tail_mass() + b.tail_mass());
  return out;
}

/// Applies the Fourier multiplier (m, n) -> f(m, n).
template <class F>
TorusElement multiplier(const TorusElement& a, F f) {
  TorusElement out(a.theta(), a.radius());
  a.for_each([&](int m, int n, cplx c) { out.ref(m, n) = f(m, n) * c; });
  out.add_tail_mass(a.tail_mass());
  return out;
}

}  // namespace detail

inline TorusElement operator+(const TorusElement& a, const TorusElement& b) {
  return detail::combine(a, b, [](cplx x, cplx y) { return x + y; });
}

inline TorusElement operator-(const TorusElement& a, const TorusElement& b) {
  return detail::combine(a, b, [](cplx x, cplx y) { return x - y; });
}

inline TorusElement operator*(cplx s, const TorusElement& a) {
  return detail::multiplier(a, [s](int, int) { return s; });
}

inline TorusElement operator*(const TorusElement& a, cplx s) { return s * a; }
inline TorusElement operator-(const TorusElement& a) { return cplx(-1.0) * a; }

inline TorusElement operator+(const TorusElement& a, cplx s) {
  return a + scalar_element(a.theta(), s);
}

inline TorusElement operator-(const TorusElement& a, cplx s) {
  return a - scalar_element(a.theta(), s);
}

// ---------------------------------------------------------------------------
// Twisted product
//
//   (sum c_{m,n} U^m V^n)(sum d_{k,l} U^k V^l)
//     = sum c_{m,n} d_{k,l} e^{-2 pi i k n theta} U^{m+k} V^{n+l}.

namespace detail {

struct Box {
  int m_lo = 0, m_hi = -1, n_lo = 0, n_hi = -1;
  bool empty() const { return m_hi < m_lo; }
};

inline Box nonzero_box(const TorusElement& a) {
  Box b{a.radius(), -a.radius(), a.radius(), -a.radius()};
  a.for_each_nonzero([&](int m, int n, cplx) {
    b.m_lo = std::min(b.m_lo, m);
    b.m_hi = std::max(b.m_hi, m);
    b.n_lo = std::min(b.n_lo, n);
    b.n_hi = std::max(b.n_hi, n);
  });
  return b;
}

/// Untruncated product on radius a.radius() + b.radius(); no tail bookkeeping.
inline TorusElement full_product(const TorusElement& a, const TorusElement& b) {
  const int full = a.radius() + b.radius();
  TorusElement out(a.theta(), full);
  const Box ba = nonzero_box(a);
  const Box bb = nonzero_box(b);
  if (ba.empty() || bb.empty()) return out;

  // e^{-2 pi i j theta} for |j| <= max|k| * max|n|
  const long long kmax = std::max(std::abs(bb.m_lo), std::abs(bb.m_hi));
  const long long nmax = std::max(std::abs(ba.n_lo), std::abs(ba.n_hi));
  const long long jmax = kmax * nmax;
  std::vector<cplx> phase(static_cast<std::size_t>(2 * jmax + 1));
  for (long long j = -jmax; j <= jmax; ++j)
    phase[static_cast<std::size_t>(j + jmax)] = unit_phase(-j, a.theta());

  const int bw = bb.n_hi - bb.n_lo + 1;
  const int bh = bb.m_hi - bb.m_lo + 1;
  std::vector<cplx> twisted(static_cast<std::size_t>(bw) * bh);
  const int ow = out.width();
  cplx* dst = out.data().data();

  for (int n = ba.n_lo; n <= ba.n_hi; ++n) {
    bool row_nonzero = false;
    for (int m = ba.m_lo; m <= ba.m_hi && !row_nonzero; ++m)
      row_nonzero = a.ref(m, n) != cplx{};
    if (!row_nonzero) continue;

    for (int k = bb.m_lo; k <= bb.m_hi; ++k) {
      const cplx ph = phase[static_cast<std::size_t>(static_cast<long long>(k) * n + jmax)];
      cplx* row = &twisted[static_cast<std::size_t>(k - bb.m_lo) * bw];
      for (int l = bb.n_lo; l <= bb.n_hi; ++l) row[l - bb.n_lo] = ph * b.ref(k, l);
    }
    for (int m = ba.m_lo; m <= ba.m_hi; ++m) {
      const cplx c = a.ref(m, n);
      if (c == cplx{}) continue;
      for (int k = bb.m_lo; k <= bb.m_hi; ++k) {
        const cplx* src = &twisted[static_cast<std::size_t>(k - bb.m_lo) * bw];
        cplx* o = dst + static_cast<std::size_t>(m + k + full) * ow +
                  static_cast<std::size_t>(n + bb.n_lo + full);
        for (int l = 0; l < bw; ++l) o[l] += c * src[l];
      }
    }
  }
  return out;
}

}  // namespace detail

/// Product of a and b truncated per policy. The discarded l1 mass is added to
/// the result's tail mass; a single truncation above policy.tail_tol throws.
inline TorusElement twisted_mul(const TorusElement& a, const TorusElement& b,
                                const TruncationPolicy& policy) {
  require_same_theta(a, b);
  if (a.radius() > policy.max_radius || b.radius() > policy.max_radius)
    throw DomainError("operand support exceeds the truncation policy's max_radius");

  TorusElement out = detail::full_product(a, b);
  const int target = policy.growth_mode == GrowthMode::grow_exact
                         ? std::min(out.radius(), policy.max_radius)
                         : std::max(a.radius(), b.radius());
  const double discarded = out.resize(target);
  if (discarded > policy.tail_tol)
    throw TruncationOverflow("product truncation discarded l1 mass " + std::to_string(discarded) +
                                 " above tail_tol",
                             discarded);
  out.add_tail_mass(a.tail_mass() + b.tail_mass());
  return out;
}

/// Untruncated product; the result radius is the sum of the operand radii.
inline TorusElement exact_mul(const TorusElement& a, const TorusElement& b) {
  require_same_theta(a, b);
  TorusElement out = detail::full_product(a, b);
  out.add_tail_mass(a.tail_mass() + b.tail_mass());
  return out;
}

// ---------------------------------------------------------------------------
// Involution, trace, derivations

/// (c U^m V^n)* = conj(c) e^{-2 pi i m n theta} U^{-m} V^{-n}
inline TorusElement adjoint(const TorusElement& a) {
  TorusElement out(a.theta(), a.radius());
  a.for_each_nonzero([&](int m, int n, cplx c) {
    out.ref(-m, -n) = std::conj(c) * unit_phase(-static_cast<long long>(m) * n, a.theta());
  });
  out.add_tail_mass(a.tail_mass());
  return out;
}

inline cplx trace(const TorusElement& a) { return a.coeff(0, 0); }

/// delta_1 multiplies c_{m,n} by 2 pi i m, delta_2 by 2 pi i n.
inline TorusElement derive(const TorusElement& a, int j) {
  if (j != 1 && j != 2) throw DomainError("derivation index must be 1 or 2");
  return detail::multiplier(a, [j](int m, int n) {
    return cplx(0.0, kTwoPi * (j == 1 ? m : n));
  });
}

inline TorusElement laplacian(const TorusElement& a) {
  return detail::multiplier(a, [](int m, int n) {
    return cplx(-kFourPiSq * (static_cast<double>(m) * m + static_cast<double>(n) * n));
  });
}

/// dbar = (delta_1 + i delta_2)/2, multiplier pi i (m + i n).
inline TorusElement dbar(const TorusElement& a) {
  return detail::multiplier(a, [](int m, int n) { return cplx(0.0, kPi) * cplx(m, n); });
}

/// d = (delta_1 - i delta_2)/2, multiplier pi i (m - i n).
inline TorusElement dholo(const TorusElement& a) {
  return detail::multiplier(a, [](int m, int n) { return cplx(0.0, kPi) * cplx(m, -n); });
}

/// Gauge action c_{m,n} -> z1^m z2^n c_{m,n}.
inline TorusElement gauge_act(const TorusElement& a, cplx z1, cplx z2) {
  constexpr double tol = 1e-12;
  if (std::abs(std::abs(z1) - 1.0) > tol || std::abs(std::abs(z2) - 1.0) > tol)
    throw DomainError("gauge action requires unit-modulus arguments");
  const double t1 = std::arg(z1);
  const double t2 = std::arg(z2);
  return detail::multiplier(a, [t1, t2](int m, int n) { return std::polar(1.0, m * t1 + n * t2); });
}

// ---------------------------------------------------------------------------
// Norms

inline double l1_norm(const TorusElement& a) {
  double s = 0.0;
  for (cplx c : a.data()) s += std::abs(c);
  return s;
}

inline double l2_norm(const TorusElement& a) {
  double s = 0.0;
  for (cplx c : a.data()) s += std::norm(c);
  return std::sqrt(s);
}

/// H^n norm: weight sum_{l=0}^{n} (4 pi^2 (m^2+n^2))^l on |c_{m,n}|^2.
inline double sobolev_norm(const TorusElement& a, int order) {
  if (order < 0) throw DomainError("Sobolev order must be nonnegative");
  double s = 0.0;
  a.for_each_nonzero([&](int m, int n, cplx c) {
    const double x = kFourPiSq * (static_cast<double>(m) * m + static_cast<double>(n) * n);
    double w = 0.0, p = 1.0;
    for (int l = 0; l <= order; ++l, p *= x) w += p;
    s += w * std::norm(c);
  });
  return std::sqrt(s);
}

/// Weighted l1 norms: k=1 uses 2+m^2+n^2, k=2 uses 8+(m^2+n^2)^2.
/// Both are submultiplicative under the twisted product.
inline double bootstrap_norm(const TorusElement& a, int k) {
  if (k != 1 && k != 2) throw DomainError("bootstrap norm index must be 1 or 2");
  double s = 0.0;
  a.for_each_nonzero([&](int m, int n, cplx c) {
    const double r2 = static_cast<double>(m) * m + static_cast<double>(n) * n;
    s += (k == 1 ? 2.0 + r2 : 8.0 + r2 * r2) * std::abs(c);
  });
  return s;
}

// ---------------------------------------------------------------------------
// Self-adjointness helpers

inline TorusElement self_adjoint_part(const TorusElement& a) { return 0.5 * (a + adjoint(a)); }

inline double self_adjoint_defect(const TorusElement& a) { return l2_norm(a - adjoint(a)); }

/// Largest coefficient modulus of a - b.
inline double max_abs_diff(const TorusElement& a, const TorusElement& b) {
  const TorusElement d = a - b;
  double s = 0.0;
  for (cplx c : d.data()) s = std::max(s, std::abs(c));
  return s;
}

}  // namespace nctorus

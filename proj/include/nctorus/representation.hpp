#pragma once

// Finite clock-and-shift representations of the rational rotation algebra at a
// continued-fraction convergent p/q of theta:
//   U -> z1 diag(1, w, ..., w^{q-1}),  V -> z2 S,  w = e^{2 pi i p/q},
// with S the cyclic shift e_j -> e_{j+1}. Then UV = w VU holds exactly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "nctorus/element.hpp"
#include "nctorus/parallel.hpp"

namespace nctorus {

struct RationalApproximant {
  long long p = 0;
  long long q = 1;
  int depth = 0;  ///< continued-fraction depth that produced p/q

  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/// The first `depth` convergents of theta, starting after the integer part
/// (for the golden-ratio conjugate: 1/1, 1/2, 2/3, 3/5, ...). Stops early once
/// a convergent reproduces theta to machine precision.
inline std::vector<RationalApproximant> convergents(double theta, int depth) {
  check_theta(theta);
  if (depth < 1) throw DomainError("convergent depth must be positive");
  std::vector<RationalApproximant> out;
  long long p_prev = 1, q_prev = 0;  // p_{-1}/q_{-1}
  long long p_cur = 0, q_cur = 1;    // a0 = 0
  long double x = static_cast<long double>(theta);
  for (int k = 1; k <= depth; ++k) {
    const long double inv = 1.0L / x;
    const long double a_ld = std::floor(inv);
    if (a_ld > static_cast<long double>(std::numeric_limits<int>::max())) break;
    const long long a = static_cast<long long>(a_ld);
    const long long p_next = a * p_cur + p_prev;
    const long long q_next = a * q_cur + q_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
    out.push_back({p_cur, q_cur, k});
    const double err = std::abs(theta - static_cast<double>(p_cur) / static_cast<double>(q_cur));
    x = inv - a_ld;
    if (err <= 2.0 * std::numeric_limits<double>::epsilon() * theta || x <= 0.0L) break;
  }
  return out;
}

/// Convergent with the smallest denominator >= min_q (the last one if none is).
inline RationalApproximant approximant_with_min_q(double theta, long long min_q) {
  const auto cs = convergents(theta, 60);
  for (const auto& c : cs)
    if (c.q >= min_q) return c;
  return cs.back();
}

using ComplexMatrix = Eigen::MatrixXcd;

/// sum c_{m,n} (z1 U_q)^m (z2 V_q)^n in normal order.
inline ComplexMatrix represent(const TorusElement& a, const RationalApproximant& approx, cplx z1,
                               cplx z2) {
  const long long q = approx.q;
  if (q < 1) throw DomainError("approximant denominator must be positive");
  if (std::abs(std::abs(z1) - 1.0) > 1e-12 || std::abs(std::abs(z2) - 1.0) > 1e-12)
    throw DomainError("representation phases must have unit modulus");
  std::vector<cplx> omega(static_cast<std::size_t>(q));
  for (long long k = 0; k < q; ++k)
    omega[static_cast<std::size_t>(k)] =
        std::polar(1.0, kTwoPi * static_cast<double>((approx.p * k) % q) / static_cast<double>(q));
  auto mod = [q](long long x) { return ((x % q) + q) % q; };

  ComplexMatrix out = ComplexMatrix::Zero(q, q);
  const double t1 = std::arg(z1), t2 = std::arg(z2);
  // (U^m V^n) e_j = w^{m (j+n)} e_{j+n}
  a.for_each_nonzero([&](int m, int n, cplx c) {
    const cplx base = c * std::polar(1.0, m * t1 + n * t2);
    for (long long j = 0; j < q; ++j) {
      const long long row = mod(j + n);
      out(row, j) += base * omega[static_cast<std::size_t>(mod(static_cast<long long>(m) * (j + n)))];
    }
  });
  return out;
}

/// Uniform G x G grid of gauge phases (e^{2 pi i a/G}, e^{2 pi i b/G}).
struct PhasePoint {
  double angle1 = 0.0, angle2 = 0.0;
  cplx z1() const { return std::polar(1.0, angle1); }
  cplx z2() const { return std::polar(1.0, angle2); }
};

inline std::vector<PhasePoint> phase_grid(int size) {
  if (size < 1) throw DomainError("phase grid size must be positive");
  std::vector<PhasePoint> pts;
  pts.reserve(static_cast<std::size_t>(size) * size);
  for (int a = 0; a < size; ++a)
    for (int b = 0; b < size; ++b)
      pts.push_back({kTwoPi * a / size, kTwoPi * b / size});
  return pts;
}

namespace detail {

inline void require_self_adjoint(const TorusElement& h) {
  if (self_adjoint_defect(h) >= 1e-12 * std::max(1.0, l2_norm(h)))
    throw DomainError("element is not self-adjoint");
}

/// Hermitian part of the representing matrix; the adjoint at p/q differs from
/// the adjoint at theta by phase factors, which this absorbs.
inline ComplexMatrix hermitian_rep(const TorusElement& h, const RationalApproximant& approx,
                                   const PhasePoint& z) {
  ComplexMatrix m = represent(h, approx, z.z1(), z.z2());
  return 0.5 * (m + m.adjoint());
}

inline Eigen::VectorXd eigenvalues(const ComplexMatrix& herm) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace detail

/// Eigenvalues of every representation on the phase grid.
struct SpectrumSample {
  PhasePoint phase;
  Eigen::VectorXd eigenvalues;  ///< ascending
};

inline std::vector<SpectrumSample> spectrum_samples(const TorusElement& h,
                                                    const RationalApproximant& approx,
                                                    int grid_size) {
  detail::require_self_adjoint(h);
  const auto grid = phase_grid(grid_size);
  std::vector<SpectrumSample> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    out[i] = {grid[i], detail::eigenvalues(detail::hermitian_rep(h, approx, grid[i]))};
  });
  return out;
}

struct SpectralBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Bracket of the spectrum over all representations on the phase grid.
inline SpectralBounds spectral_bounds(const TorusElement& h, const RationalApproximant& approx,
                                      int grid_size = 8) {
  SpectralBounds b{std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
  for (const auto& s : spectrum_samples(h, approx, grid_size)) {
    b.min = std::min(b.min, s.eigenvalues.minCoeff());
    b.max = std::max(b.max, s.eigenvalues.maxCoeff());
  }
  return b;
}

/// Smallest eigenvalue over the grid (negative when h fails to be positive).
inline double positive_part_bounds(const TorusElement& h, const RationalApproximant& approx,
                                   int grid_size = 8) {
  return spectral_bounds(h, approx, grid_size).min;
}

struct MaxStateResult {
  double phi_h = 0.0;      ///< top eigenvalue over the grid
  double phi_lap_h = 0.0;  ///< <v, rep(Lap h) v> for the top eigenvector(s)
  PhasePoint phase;        ///< grid point attaining phi_h
  int top_multiplicity = 1;
  bool degenerate = false;
};

/// Vector-state surrogate of the maximum principle: pick the representation
/// and top eigenvector maximizing <v, rep(h) v>, then evaluate rep(Lap h).
/// For a degenerate top eigenspace the largest value of the compressed
/// Laplacian over that eigenspace is returned and `degenerate` is set.
inline MaxStateResult max_state_check(const TorusElement& h, const RationalApproximant& approx,
                                      int grid_size = 8, double degeneracy_tol = 1e-9) {
  const auto samples = spectrum_samples(h, approx, grid_size);
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].eigenvalues.maxCoeff() > samples[best].eigenvalues.maxCoeff()) best = i;

  const PhasePoint z = samples[best].phase;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(detail::hermitian_rep(h, approx, z));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::Index q = ev.size();
  const double top = ev(q - 1);
  const double scale = std::max(1.0, std::abs(top));
  Eigen::Index k = 1;
  while (k < q && top - ev(q - 1 - k) <= degeneracy_tol * scale) ++k;

  const ComplexMatrix basis = es.eigenvectors().rightCols(k);
  const ComplexMatrix lap = detail::hermitian_rep(laplacian(h), approx, z);
  const ComplexMatrix compressed = basis.adjoint() * lap * basis;

  MaxStateResult r;
  r.phi_h = top;
  r.phase = z;
  r.top_multiplicity = static_cast<int>(k);
  r.degenerate = k > 1;
  if (k == 1) {
    r.phi_lap_h = compressed(0, 0).real();
  } else {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> cs(0.5 * (compressed + compressed.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    r.phi_lap_h = cs.eigenvalues().maxCoeff();
  }
  return r;
}

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// lower = largest spectral norm over the phase grid, upper = l1 norm.
inline NormBracket opnorm_bracket(const TorusElement& a, const RationalApproximant& approx,
                                  int grid_size = 8) {
  const auto grid = phase_grid(grid_size);
  std::vector<double> norms(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const ComplexMatrix m = represent(a, approx, grid[i].z1(), grid[i].z2());
    norms[i] = Eigen::BDCSVD<ComplexMatrix>(m).singularValues()(0);
  });
  return {*std::max_element(norms.begin(), norms.end()), l1_norm(a)};
}

/// Smallest singular value over the phase grid: spectral evidence of
/// invertibility.
inline double min_singular_value(const TorusElement& a, const RationalApproximant& approx,
                                 int grid_size = 8) {
  const auto grid = phase_grid(grid_size);
  std::vector<double> mins(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const ComplexMatrix m = represent(a, approx, grid[i].z1(), grid[i].z2());
    const Eigen::VectorXd s = Eigen::JacobiSVD<ComplexMatrix>(m).singularValues();
    mins[i] = s(s.size() - 1);
  });
  return *std::min_element(mins.begin(), mins.end());
}

/// Discrepancy between the phases of a computed at theta and at p/q:
/// |theta - p/q| times the largest phase index R^2.
inline double substitution_slack(double theta, const RationalApproximant& approx, int radius) {
  return std::abs(theta - approx.value()) * static_cast<double>(radius) * radius;
}

}  // namespace nctorus

#pragma once

// Liouville-type equations  Lap u = mu e^u - a  (a > 0 invertible, mu > 0),
// solved by continuation through  Lap w = (1-t) w + t e^w - a  in the
// normalized variable w = u + ln mu, plus the variational functionals and
// the certificates built on them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nctorus/element.hpp"
#include "nctorus/functional_calculus.hpp"
#include "nctorus/linear_solvers.hpp"
#include "nctorus/representation.hpp"

namespace nctorus {

/// E(a) = 1/2 tau(delta_1(a)* delta_1(a) + delta_2(a)* delta_2(a))
///      = 1/2 sum 4 pi^2 (m^2+n^2) |c_{m,n}|^2.
inline double energy(const TorusElement& a) {
  double s = 0.0;
  a.for_each_nonzero([&](int m, int n, cplx c) {
    s += kFourPiSq * (static_cast<double>(m) * m + static_cast<double>(n) * n) * std::norm(c);
  });
  return 0.5 * s;
}

/// L(u) = E(u) + tau(mu e^u - u a).
inline double lagrangian(const TorusElement& u, double mu, const TorusElement& source,
                         const TruncationPolicy& policy, double exp_tol = 1e-15) {
  require_same_theta(u, source);
  if (self_adjoint_defect(u) >= 1e-10 * std::max(1.0, l2_norm(u)))
    throw DomainError("Lagrangian requires a self-adjoint argument");
  const TorusElement e = exp_element(u, policy, exp_tol);
  return energy(u) + (mu * trace(e) - trace(exact_mul(u, source))).real();
}

inline double lagrangian(const TorusElement& u, double mu, double lambda,
                         const TruncationPolicy& policy, double exp_tol = 1e-15) {
  return lagrangian(u, mu, scalar_element(u.theta(), lambda), policy, exp_tol);
}

/// d/de L(u + e h) at e = 0, i.e. -tau(h (Lap u + a - mu e^u)).
inline double lagrangian_derivative(const TorusElement& u, const TorusElement& h, double mu,
                                    const TorusElement& source, const TruncationPolicy& policy,
                                    double exp_tol = 1e-15) {
  const TorusElement e = exp_element(u, policy, exp_tol);
  const TorusElement g = laplacian(u) + source - mu * e;
  return -trace(exact_mul(h, g)).real();
}

// ---------------------------------------------------------------------------
// Continuation solver

struct ContinuationConfig {
  int t_steps = 10;
  double inner_tol = 1e-12;  ///< l2 size of a fixed-point increment
  int inner_max_iter = 500;
  double newton_tol = 1e-11;  ///< target l2 residual at t = 1
  double damping = 0.5;
  bool newton = true;
  int newton_max_iter = 20;
  int linear_max_iter = 100;
  int max_bisections = 6;
  double exp_tol = 1e-15;

  void validate() const {
    if (t_steps < 1 || inner_max_iter < 1 || newton_max_iter < 0 || linear_max_iter < 1)
      throw DomainError("continuation config: iteration counts must be positive");
    if (!(inner_tol > 0.0) || !(newton_tol > 0.0) || !(exp_tol > 0.0))
      throw DomainError("continuation config: tolerances must be positive");
    if (!(damping > 0.0 && damping <= 1.0))
      throw DomainError("continuation config: damping must lie in (0,1]");
  }
};

struct LiouvilleOptions {
  RationalApproximant approx{89, 144, 11};
  int phase_grid = 8;
};

struct SolveReport {
  bool converged = false;
  double residual_l2 = 0.0;  ///< l2(Lap u - mu e^u + a)
  std::vector<PathPoint> path;
  double tail_mass_total = 0.0;
  double trace_conservation_gap = 0.0;  ///< |tau(e^u) - tau(a)/mu|
  SpectralBounds spectral_bound_check;  ///< spectrum of u at the approximant
  double apriori_lower = 0.0;           ///< -ln||a^{-1}|| - ln mu
  double apriori_upper = 0.0;           ///< ||a|| - ln mu
  double substitution_slack = 0.0;
  int newton_iterations = 0;
  std::vector<double> lagrangian_at_t1;  ///< L at the t = 1 iterates
  bool lagrangian_monotone = true;
  double bootstrap_norm1 = 0.0;
  double bootstrap_norm2 = 0.0;
};

struct LiouvilleSolution {
  TorusElement u;
  SolveReport report;
};

namespace detail {

/// Continuation residual  Lap w - (1-t) w - t e^w + a.
inline TorusElement continuation_residual(const TorusElement& w, const TorusElement& exp_w,
                                          const TorusElement& a, double t) {
  return laplacian(w) - (1.0 - t) * w - t * exp_w + a;
}

class LiouvilleRun {
 public:
  LiouvilleRun(const TorusElement& a, const ContinuationConfig& cfg, const TruncationPolicy& policy)
      : a_(without_tail(a)), cfg_(cfg), policy_(policy) {}

  TorusElement exp_of(const TorusElement& w) {
    TorusElement e = exp_element(w, policy_, cfg_.exp_tol);
    return e;
  }

  /// Damped fixed-point sweeps of w <- (-Lap+1)^{-1}(a + t w - t e^w).
  /// Returns the iteration count, or -1 on stall (w is left unchanged).
  int fixed_point(TorusElement& w, double t, std::vector<double>* lagrangians) {
    TorusElement cur = w;
    for (int it = 1; it <= cfg_.inner_max_iter; ++it) {
      const TorusElement e = exp_of(cur);
      const TorusElement rhs = a_ + t * cur - t * e;
      TorusElement next = (1.0 - cfg_.damping) * cur + cfg_.damping * solve_helmholtz(rhs, 1.0);
      next = self_adjoint_part(next);
      tail_ += next.tail_mass();
      next = without_tail(next);
      const double step = l2_norm(next - cur);
      cur = std::move(next);
      if (lagrangians) lagrangians->push_back(lagrangian(cur, 1.0, a_, policy_, cfg_.exp_tol));
      if (!std::isfinite(step)) return -1;
      if (step < cfg_.inner_tol) {
        w = std::move(cur);
        return it;
      }
    }
    return -1;
  }

  double residual(const TorusElement& w, double t) {
    return l2_norm(continuation_residual(w, exp_of(w), a_, t));
  }

  /// Newton refinement at t = 1. The correction solves
  ///   (Lap - dexp(w)[.]) h = -F(w)
  /// by stationary iteration preconditioned with (-Lap + c)^{-1}, c = tau(e^w).
  int newton(TorusElement& w, double& res, std::vector<double>& lagrangians) {
    int iters = 0;
    while (res >= cfg_.newton_tol && iters < cfg_.newton_max_iter) {
      ++iters;
      const TorusElement e = exp_of(w);
      const TorusElement F = continuation_residual(w, e, a_, 1.0);
      const double shift = std::max(trace(e).real(), 1e-3);
      const double fnorm = l2_norm(F);
      TorusElement h(w.theta(), 0);
      for (int k = 0; k < cfg_.linear_max_iter; ++k) {
        const TorusElement jh = laplacian(h) - dexp(w, h, policy_, cfg_.exp_tol);
        const TorusElement lin = F + jh;  // J h - (-F)
        if (l2_norm(lin) < 1e-3 * fnorm) break;
        h = h + solve_helmholtz(lin, shift);
      }
      TorusElement next = self_adjoint_part(w + h);
      tail_ += next.tail_mass();
      next = without_tail(next);
      const double next_res = residual(next, 1.0);
      if (!(next_res < res)) break;  // no progress: keep the fixed-point answer
      w = std::move(next);
      res = next_res;
      lagrangians.push_back(lagrangian(w, 1.0, a_, policy_, cfg_.exp_tol));
    }
    return iters;
  }

  double tail() const { return tail_; }
  const TorusElement& source() const { return a_; }

 private:
  TorusElement a_;
  ContinuationConfig cfg_;
  TruncationPolicy policy_;
  double tail_ = 0.0;
};

}  // namespace detail

/// Solves Lap u = mu e^u - a for self-adjoint, spectrally positive a.
inline LiouvilleSolution solve_liouville(const TorusElement& a, double mu, const ContinuationConfig& cfg,
                                         const TruncationPolicy& policy,
                                         const LiouvilleOptions& opts = {}) {
  cfg.validate();
  policy.validate();
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  if (self_adjoint_defect(a) >= 1e-12 * std::max(1.0, l2_norm(a)))
    throw DomainError("source element must be self-adjoint");
  const SpectralBounds a_spec = spectral_bounds(a, opts.approx, opts.phase_grid);
  if (!(a_spec.min > 0.0))
    throw DomainError("source element is not positive and invertible (min spectrum " +
                      std::to_string(a_spec.min) + ")");

  detail::LiouvilleRun run(a, cfg, policy);
  SolveReport rep;
  const double log_mu = std::log(mu);

  TorusElement w = solve_helmholtz(run.source(), 1.0);
  rep.path.push_back({0.0, 0, run.residual(w, 0.0), 0.0});
  rep.path.back().lagrangian = lagrangian(w - log_mu, mu, run.source(), policy, cfg.exp_tol);

  const double nominal = 1.0 / cfg.t_steps;
  double t = 0.0;
  while (t < 1.0) {
    double step = std::min(nominal, 1.0 - t);
    int bisections = 0;
    for (;;) {
      const double t_next = (1.0 - t - step < 1e-14) ? 1.0 : t + step;
      std::vector<double>* lag = t_next == 1.0 ? &rep.lagrangian_at_t1 : nullptr;
      const int iters = run.fixed_point(w, t_next, lag);
      if (iters >= 0) {
        t = t_next;
        const TorusElement u = w - log_mu;
        rep.path.push_back({t, iters, run.residual(w, t), lagrangian(u, mu, run.source(), policy, cfg.exp_tol)});
        break;
      }
      if (++bisections > cfg.max_bisections)
        throw ContinuationStall("fixed-point iteration stalled at t = " + std::to_string(t + step) +
                                    " after " + std::to_string(cfg.max_bisections) + " bisections",
                                rep.path);
      step *= 0.5;
    }
  }

  double res = run.residual(w, 1.0);
  if (cfg.newton) rep.newton_iterations = run.newton(w, res, rep.lagrangian_at_t1);

  TorusElement u = w - log_mu;
  rep.tail_mass_total = run.tail();
  u.add_tail_mass(rep.tail_mass_total);
  rep.residual_l2 = res;
  rep.converged = res < cfg.newton_tol + rep.tail_mass_total;

  const TorusElement exp_w = exp_element(w, policy, cfg.exp_tol);
  rep.trace_conservation_gap = std::abs(trace(exp_w).real() / mu - trace(run.source()).real() / mu);
  rep.spectral_bound_check = spectral_bounds(self_adjoint_part(u), opts.approx, opts.phase_grid);
  rep.apriori_lower = -std::log(1.0 / a_spec.min) - log_mu;
  rep.apriori_upper = a_spec.max - log_mu;
  rep.substitution_slack = substitution_slack(a.theta(), opts.approx, u.radius());
  for (std::size_t i = 1; i < rep.lagrangian_at_t1.size(); ++i)
    if (rep.lagrangian_at_t1[i] > rep.lagrangian_at_t1[i - 1] + 1e-12 * std::abs(rep.lagrangian_at_t1[i - 1]))
      rep.lagrangian_monotone = false;
  rep.bootstrap_norm1 = bootstrap_norm(u, 1);
  rep.bootstrap_norm2 = bootstrap_norm(u, 2);
  return {std::move(u), std::move(rep)};
}

inline LiouvilleSolution solve_liouville(double lambda, double mu, double theta,
                                         const ContinuationConfig& cfg, const TruncationPolicy& policy,
                                         const LiouvilleOptions& opts = {}) {
  return solve_liouville(scalar_element(theta, lambda), mu, cfg, policy, opts);
}

// ---------------------------------------------------------------------------
// Certificates

/// The three members of  -2E(v) = tau(v Lap v) = lambda tau(v(e^v - 1)).
struct UniquenessSides {
  double minus_two_energy = 0.0;
  double v_lap_v = 0.0;
  double lambda_pairing = 0.0;
  double defect() const {
    return std::max(std::abs(minus_two_energy - v_lap_v), std::abs(v_lap_v - lambda_pairing));
  }
};

inline UniquenessSides uniqueness_sides(const TorusElement& v, double lambda,
                                        const TruncationPolicy& policy, double exp_tol = 1e-15) {
  if (self_adjoint_defect(v) >= 1e-10 * std::max(1.0, l2_norm(v)))
    throw DomainError("uniqueness identity requires a self-adjoint argument");
  UniquenessSides s;
  s.minus_two_energy = -2.0 * energy(v);
  s.v_lap_v = trace(exact_mul(v, laplacian(v))).real();
  const TorusElement ev = exp_element(v, policy, exp_tol) - 1.0;
  s.lambda_pairing = lambda * trace(exact_mul(v, ev)).real();
  return s;
}

/// For two solutions of Lap u = mu e^u - lambda, both v_i = u_i - ln(lambda/mu)
/// must satisfy the identity with all three sides zero; returns the largest
/// absolute side over both, which certifies u_1 = u_2 = ln(lambda/mu) when small.
inline double uniqueness_gap(const TorusElement& u1, const TorusElement& u2, double lambda, double mu,
                             const TruncationPolicy& policy, double exp_tol = 1e-15) {
  require_same_theta(u1, u2);
  if (!(lambda > 0.0) || !(mu > 0.0)) throw DomainError("lambda and mu must be positive");
  const double t0 = std::log(lambda / mu);
  double gap = 0.0;
  for (const TorusElement* u : {&u1, &u2}) {
    const UniquenessSides s = uniqueness_sides(*u - t0, lambda, policy, exp_tol);
    gap = std::max({gap, std::abs(s.minus_two_energy), std::abs(s.v_lap_v), std::abs(s.lambda_pairing)});
  }
  return gap;
}

/// tau(Lap u + lambda e^u) = lambda tau(e^u): a residual floor showing
/// Lap u = -lambda e^u has no solution.
inline double nonexistence_certificate(const TorusElement& u, double lambda,
                                       const TruncationPolicy& policy, double exp_tol = 1e-15) {
  if (lambda == 0.0) throw DomainError("lambda must be nonzero");
  if (self_adjoint_defect(u) >= 1e-10 * std::max(1.0, l2_norm(u)))
    throw DomainError("certificate requires a self-adjoint u");
  return trace(laplacian(u) + lambda * exp_element(u, policy, exp_tol)).real();
}

/// tau(Lap u + (h e^u + e^u h)/2) = tau(h e^u) for semidefinite h.
inline double nonexistence_certificate_symmetrized(const TorusElement& u, const TorusElement& h,
                                                   const RationalApproximant& approx,
                                                   const TruncationPolicy& policy, int phase_grid = 8,
                                                   double exp_tol = 1e-15, double sign_slack = 1e-10) {
  require_same_theta(u, h);
  if (self_adjoint_defect(u) >= 1e-10 * std::max(1.0, l2_norm(u)) ||
      self_adjoint_defect(h) >= 1e-10 * std::max(1.0, l2_norm(h)))
    throw DomainError("certificate requires self-adjoint u and h");
  const SpectralBounds hb = spectral_bounds(self_adjoint_part(h), approx, phase_grid);
  if (hb.min < -sign_slack && hb.max > sign_slack)
    throw DomainError("h must be positive or negative semidefinite");
  const TorusElement e = exp_element(u, policy, exp_tol);
  const TorusElement sym = 0.5 * (exact_mul(h, e) + exact_mul(e, h));
  return trace(laplacian(u) + sym).real();
}

}  // namespace nctorus

#pragma once

// Energy of unitaries, the Euler-Lagrange residual
//   r(u) = u* Lap u + delta_1(u)* delta_1(u) + delta_2(u)* delta_2(u),
// and a descent flow u <- u exp(e r) along the curves u e^{i e h}, h = -i r.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nctorus/element.hpp"
#include "nctorus/functional_calculus.hpp"
#include "nctorus/nonlinear_solvers.hpp"
#include "nctorus/random.hpp"

namespace nctorus {

/// E(u) = 1/2 tau(delta_1(u)* delta_1(u) + delta_2(u)* delta_2(u)).
inline double energy_unitary(const TorusElement& u) { return energy(u); }

/// l2 norm of u* u - 1.
inline double unitarity_defect(const TorusElement& u) {
  return l2_norm(exact_mul(adjoint(u), u) - 1.0);
}

inline TorusElement el_residual(const TorusElement& u, const TruncationPolicy& policy,
                                double defect_ceiling = 1e-8) {
  const double defect = unitarity_defect(u);
  if (!(defect <= defect_ceiling))
    throw DomainError("unitarity defect " + std::to_string(defect) + " exceeds the ceiling");
  const TorusElement us = adjoint(u);
  const TorusElement d1 = derive(u, 1);
  const TorusElement d2 = derive(u, 2);
  return twisted_mul(us, laplacian(u), policy) + twisted_mul(adjoint(d1), d1, policy) +
         twisted_mul(adjoint(d2), d2, policy);
}

/// The same residual in divergence form delta_1(u* delta_1 u) + delta_2(u* delta_2 u).
inline TorusElement el_residual_divergence(const TorusElement& u, const TruncationPolicy& policy) {
  const TorusElement us = adjoint(u);
  return derive(twisted_mul(us, derive(u, 1), policy), 1) +
         derive(twisted_mul(us, derive(u, 2), policy), 2);
}

/// Newton-type polar correction u <- u (3 - u* u)/2, repeated while it
/// shrinks the unitarity defect.
inline TorusElement reunitarize(TorusElement u, const TruncationPolicy& policy, int max_iter = 8) {
  double defect = unitarity_defect(u);
  for (int i = 0; i < max_iter && defect > 0.0; ++i) {
    const TorusElement uu = twisted_mul(adjoint(u), u, policy);
    TorusElement next = 0.5 * twisted_mul(u, 3.0 * identity(u.theta()) - uu, policy);
    const double d = unitarity_defect(next);
    if (!(d < defect)) break;
    u = std::move(next);
    defect = d;
  }
  return u;
}

struct FlowConfig {
  int max_steps = 2000;
  double initial_step = 1e-3;
  double max_step = 1.0;
  double min_step = 1e-14;
  double grad_tol = 1e-9;
  double defect_ceiling = 1e-8;
  int reunitarize_every = 10;
  double armijo = 1e-4;
  double exp_tol = 1e-15;
};

struct FlowRecord {
  double energy = 0.0;
  double gradient_norm_l2 = 0.0;
  double unitarity_defect = 0.0;
  double step_size = 0.0;
};

enum class FlowVerdict { converged, max_steps, stall };

inline const char* to_string(FlowVerdict v) {
  switch (v) {
    case FlowVerdict::converged: return "converged";
    case FlowVerdict::max_steps: return "max_steps";
    case FlowVerdict::stall: return "stall";
  }
  return "unknown";
}

struct FlowTrace {
  std::vector<FlowRecord> records;  ///< records[0] describes the start
  TorusElement terminal;
  FlowVerdict verdict = FlowVerdict::max_steps;

  int accepted_steps() const { return static_cast<int>(records.size()) - 1; }
};

/// Backtracking descent for the unitary energy. Each accepted step satisfies
/// E(new) <= E(old) - armijo * e * ||r||^2.
inline FlowTrace gradient_flow(const TorusElement& u0, int steps, const FlowConfig& cfg,
                               const TruncationPolicy& policy) {
  TorusElement u = u0;
  double defect = unitarity_defect(u);
  if (!(defect <= cfg.defect_ceiling))
    throw DomainError("initial unitarity defect " + std::to_string(defect) + " exceeds the ceiling");

  double e = energy_unitary(u);
  TorusElement r = el_residual(u, policy, cfg.defect_ceiling);
  double g = l2_norm(r);
  FlowTrace trace{{{e, g, defect, 0.0}}, u, FlowVerdict::max_steps};

  double eps = cfg.initial_step;
  for (int step = 1; step <= steps; ++step) {
    if (g < cfg.grad_tol) {
      trace.verdict = FlowVerdict::converged;
      break;
    }
    bool accepted = false;
    TorusElement cand = u, cand_r = r;
    double cand_e = e, cand_defect = defect;
    bool breach = false;
    while (eps >= cfg.min_step) {
      try {
        cand = twisted_mul(u, exp_element(eps * r, policy, cfg.exp_tol), policy);
        cand_defect = unitarity_defect(cand);
        const bool scheduled = step % cfg.reunitarize_every == 0 && cand_defect > 0.5 * cfg.defect_ceiling;
        if (scheduled || cand_defect > cfg.defect_ceiling) {
          cand = reunitarize(std::move(cand), policy);
          cand_defect = unitarity_defect(cand);
        }
        breach = cand_defect > cfg.defect_ceiling;
        if (breach) {
          eps *= 0.5;
          continue;
        }
        cand_e = energy_unitary(cand);
        if (cand_e <= e - cfg.armijo * eps * g * g) {
          // the residual must also fit: a step that excites modes near the
          // truncation radius is rejected here rather than one step later
          cand_r = el_residual(cand, policy, cfg.defect_ceiling);
          accepted = true;
          break;
        }
      } catch (const TruncationOverflow&) {
        breach = false;
      }
      eps *= 0.5;
    }
    if (!accepted && breach)
      throw TruncationOverflow("unitarity defect " + std::to_string(cand_defect) +
                                   " stays above the ceiling after re-unitarization; increase max_radius",
                               cand_defect);
    if (!accepted) {
      trace.verdict = FlowVerdict::stall;
      break;
    }
    const double used = eps;
    eps = std::min(2.0 * eps, cfg.max_step);
    u = std::move(cand);
    r = std::move(cand_r);
    e = cand_e;
    defect = cand_defect;
    g = l2_norm(r);
    trace.records.push_back({e, g, defect, used});
    trace.terminal = u;
  }
  if (trace.verdict == FlowVerdict::max_steps && g < cfg.grad_tol) trace.verdict = FlowVerdict::converged;
  return trace;
}

/// lhs = (E(u e^{i t h}) - 2 pi^2 (m^2+n^2)) / t^2 against rhs = E(h) for
/// u = U^m V^n; the two agree up to O(t).
struct SecondVariation {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline SecondVariation second_variation_check(int m, int n, const TorusElement& h, double t,
                                              const TruncationPolicy& policy, double exp_tol = 1e-16) {
  if (self_adjoint_defect(h) >= 1e-12 * std::max(1.0, l2_norm(h)))
    throw DomainError("second variation requires a self-adjoint direction");
  if (t == 0.0) throw DomainError("second variation step must be nonzero");
  const TorusElement u = monomial(h.theta(), m, n);
  const TorusElement v = twisted_mul(u, exp_element(cplx(0.0, t) * h, policy, exp_tol), policy);
  const double base = 2.0 * kPi * kPi * (static_cast<double>(m) * m + static_cast<double>(n) * n);
  return {(energy_unitary(v) - base) / (t * t), energy(h)};
}

// ---------------------------------------------------------------------------
// Probe of the minimizers in the component of U^m V^n

struct ProbeConfig {
  double magnitude = 0.1;
  double rho = 0.5;
  int perturbation_radius = 3;
  int steps = 2000;
  double energy_tol = 1e-4;    ///< terminal energy match with 2 pi^2 (m^2+n^2)
  double distance_tol = 1e-2;  ///< l2 distance to the circle of scalar multiples
  FlowConfig flow;
};

struct ProbeTrial {
  double initial_energy = 0.0;
  double terminal_energy = 0.0;
  double terminal_gradient = 0.0;
  double distance = 0.0;
  int steps = 0;
  FlowVerdict verdict = FlowVerdict::max_steps;
  bool at_conjectured_minimizer = false;
};

struct ProbeSummary {
  int m = 0, n = 0;
  std::uint64_t seed = 0;
  double target_energy = 0.0;
  std::vector<ProbeTrial> trials;
  int to_minimizer = 0;
  int elsewhere = 0;
};

/// min over |z| = 1 of ||u - z U^m V^n||_2.
inline double distance_to_monomial_circle(const TorusElement& u, int m, int n) {
  const double nu = l2_norm(u);
  return std::sqrt(std::max(0.0, nu * nu + 1.0 - 2.0 * std::abs(u.coeff(m, n))));
}

inline ProbeTrial probe_trial(int m, int n, const TorusElement& h, const ProbeConfig& cfg,
                              const TruncationPolicy& policy) {
  const TorusElement base = monomial(h.theta(), m, n);
  const TorusElement u0 =
      twisted_mul(base, exp_element(cplx(0.0, cfg.magnitude) * h, policy, cfg.flow.exp_tol), policy);
  const FlowTrace tr = gradient_flow(u0, cfg.steps, cfg.flow, policy);
  ProbeTrial t;
  t.initial_energy = tr.records.front().energy;
  t.terminal_energy = tr.records.back().energy;
  t.terminal_gradient = tr.records.back().gradient_norm_l2;
  t.distance = distance_to_monomial_circle(tr.terminal, m, n);
  t.steps = tr.accepted_steps();
  t.verdict = tr.verdict;
  const double target = 2.0 * kPi * kPi * (static_cast<double>(m) * m + static_cast<double>(n) * n);
  t.at_conjectured_minimizer =
      std::abs(t.terminal_energy - target) <= cfg.energy_tol && t.distance <= cfg.distance_tol;
  return t;
}

/// Perturbs U^m V^n by exp(i magnitude h) for random self-adjoint h drawn from
/// the seeded generator and runs the flow from each start.
inline ProbeSummary conjecture_probe(double theta, int m, int n, int trials, std::uint64_t seed,
                                     const ProbeConfig& cfg, const TruncationPolicy& policy) {
  if (trials < 1) throw DomainError("probe needs at least one trial");
  ProbeSummary s;
  s.m = m;
  s.n = n;
  s.seed = seed;
  s.target_energy = 2.0 * kPi * kPi * (static_cast<double>(m) * m + static_cast<double>(n) * n);
  Rng rng(seed);
  std::vector<TorusElement> directions;
  for (int i = 0; i < trials; ++i)
    directions.push_back(random_self_adjoint(theta, cfg.perturbation_radius, cfg.rho, rng));
  s.trials.resize(static_cast<std::size_t>(trials));
  parallel_for(directions.size(), [&](std::size_t i) { s.trials[i] = probe_trial(m, n, directions[i], cfg, policy); });
  for (const auto& t : s.trials) (t.at_conjectured_minimizer ? s.to_minimizer : s.elsewhere)++;
  return s;
}

}  // namespace nctorus

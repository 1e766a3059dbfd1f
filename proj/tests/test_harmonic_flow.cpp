#include "support.hpp"

using namespace nctorus;
using nctorus::testing::kGolden;
using nctorus::testing::near_element;

namespace {

const cplx I(0.0, 1.0);

TruncationPolicy policy(int radius = 16) { return {radius, 1e-6, GrowthMode::grow_exact}; }

TorusElement perturbed(int m, int n, double magnitude, std::uint64_t seed, int radius = 16) {
  Rng rng(seed);
  const TorusElement h = random_self_adjoint(kGolden, 3, 0.5, rng);
  return twisted_mul(monomial(kGolden, m, n), exp_element(cplx(0.0, magnitude) * h, policy(radius), 1e-16),
                     policy(radius));
}

}  // namespace

TEST(EnergyUnitary, Examples) {
  EXPECT_NEAR(energy_unitary(monomial(kGolden, 2, -3)), 2.0 * kPi * kPi * 13.0, 1e-11);
  EXPECT_EQ(energy_unitary(identity(kGolden)), 0.0);
  const TorusElement u = perturbed(1, 1, 0.2, 3);
  EXPECT_NEAR(energy_unitary(std::polar(1.0, 0.7) * u), energy_unitary(u), 1e-12 * energy_unitary(u));
}

TEST(ElResidual, MonomialsAreHarmonic) {
  for (int m = -8; m <= 8; ++m)
    for (int n = -8; n <= 8; ++n) {
      const TorusElement u = monomial(kGolden, m, n);
      EXPECT_LT(l2_norm(el_residual(u, policy())), 1e-12) << m << "," << n;
    }
  EXPECT_EQ(l2_norm(el_residual(identity(kGolden), policy())), 0.0);
}

TEST(ElResidual, SkewAdjointOnUnitaries) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TorusElement u = reunitarize(perturbed(1, 0, 0.3, seed, 32), policy(32));
    const TorusElement r = el_residual(u, policy(32));
    EXPECT_LT(l2_norm(r + adjoint(r)), 1e-10);
    EXPECT_GT(l2_norm(r), 1e-3);
  }
}

TEST(ElResidual, DivergenceFormAgrees) {
  const TruncationPolicy exact{40, 1e-300, GrowthMode::grow_exact};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TorusElement u = perturbed(2, -1, 0.3, seed);
    EXPECT_TRUE(near_element(el_residual(u, exact), el_residual_divergence(u, exact), 1e-11));
  }
}

TEST(ElResidual, RejectsNonUnitary) {
  EXPECT_THROW(el_residual(2.0 * identity(kGolden), policy()), DomainError);
}

TEST(ElResidual, ScalarGaugeInvariance) {
  const TorusElement u = perturbed(1, 0, 0.2, 9);
  const TorusElement v = std::polar(1.0, 2.0) * u;
  EXPECT_NEAR(l2_norm(el_residual(u, policy())), l2_norm(el_residual(v, policy())), 1e-12);
}

TEST(Reunitarize, ContractsDefect) {
  const TorusElement u = perturbed(1, 0, 0.2, 4);
  const TorusElement spoiled = u + monomial(kGolden, 2, 1, 1e-4);
  const TorusElement fixed = reunitarize(spoiled, policy());
  EXPECT_LT(unitarity_defect(fixed), 1e-10);
  EXPECT_GT(unitarity_defect(spoiled), 1e-5);
}

TEST(FirstOrder, DerivativeAlongResidualIsMinusNormSquared) {
  const TruncationPolicy p = policy(20);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const TorusElement u = perturbed(1, 0, 0.2, seed, 20);
    const TorusElement r = el_residual(u, p);
    const double g = l2_norm(r);
    auto E = [&](double eps) { return energy_unitary(twisted_mul(u, exp_element(eps * r, p, 1e-16), p)); };
    auto err = [&](double eps) { return std::abs((E(eps) - E(-eps)) / (2 * eps) + g * g); };
    const double e1 = err(1e-4), e2 = err(5e-5), e3 = err(2.5e-5);
    EXPECT_LT(e3, 1e-3 * g * g);
    EXPECT_GT(std::log2(e1 / e2), 1.9);
    EXPECT_GT(std::log2(e2 / e3), 1.9);
  }
}

TEST(Flow, MonomialStartIsStationary) {
  FlowConfig cfg;
  const FlowTrace tr = gradient_flow(monomial(kGolden, 1, 2), 50, cfg, policy());
  EXPECT_EQ(tr.accepted_steps(), 0);
  EXPECT_EQ(tr.verdict, FlowVerdict::converged);
  EXPECT_NEAR(tr.records.front().energy, 2.0 * kPi * kPi * 5.0, 1e-11);
  EXPECT_TRUE(near_element(tr.terminal, monomial(kGolden, 1, 2), 0.0));
}

TEST(Flow, PerturbedGeneratorReturnsToMinimum) {
  FlowConfig cfg;
  cfg.grad_tol = 1e-5;
  const TruncationPolicy p{10, 1e-4, GrowthMode::grow_exact};
  const TorusElement u0 = perturbed(1, 0, 0.05, 7, 10);
  const FlowTrace tr = gradient_flow(u0, 1500, cfg, p);
  EXPECT_LT(std::abs(tr.records.back().energy - 2.0 * kPi * kPi), 1e-6);
  EXPECT_LT(distance_to_monomial_circle(tr.terminal, 1, 0), 1e-3);
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    EXPECT_LE(tr.records[i].energy, tr.records[i - 1].energy);
    EXPECT_LE(tr.records[i].unitarity_defect, cfg.defect_ceiling);
    EXPECT_GT(tr.records[i].step_size, 0.0);
  }
}

TEST(Flow, TrajectoryIsGaugeInvariant) {
  FlowConfig cfg;
  const TruncationPolicy p{10, 1e-4, GrowthMode::grow_exact};
  const TorusElement u0 = perturbed(0, 1, 0.05, 8, 10);
  const cplx z = std::polar(1.0, -0.9);
  const FlowTrace a = gradient_flow(u0, 30, cfg, p);
  const FlowTrace b = gradient_flow(z * u0, 30, cfg, p);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    EXPECT_NEAR(a.records[i].energy, b.records[i].energy, 1e-10 * a.records[i].energy);
  EXPECT_TRUE(near_element(z * a.terminal, b.terminal, 1e-9));
}

TEST(Flow, RejectsNonUnitaryStart) {
  EXPECT_THROW(gradient_flow(2.0 * identity(kGolden), 10, FlowConfig{}, policy()), DomainError);
}

TEST(Flow, TerminalSatisfiesEulerLagrangeToTolerance) {
  FlowConfig cfg;
  cfg.grad_tol = 1e-3;
  const TruncationPolicy p{10, 1e-4, GrowthMode::grow_exact};
  const FlowTrace tr = gradient_flow(perturbed(1, 0, 0.05, 2, 10), 1000, cfg, p);
  ASSERT_EQ(tr.verdict, FlowVerdict::converged);
  EXPECT_LT(l2_norm(el_residual(tr.terminal, p)), cfg.grad_tol);
}

TEST(SecondVariation, ConstantDirectionIsFlat) {
  for (double t : {1e-1, 1e-2, 1e-3}) {
    const SecondVariation sv = second_variation_check(1, 1, scalar_element(kGolden, 0.7), t, policy());
    EXPECT_NEAR(sv.lhs, 0.0, 1e-7);
    EXPECT_EQ(sv.rhs, 0.0);
  }
}

TEST(SecondVariation, CosineDirection) {
  const TorusElement h = monomial(kGolden, 1, 0) + monomial(kGolden, -1, 0);
  const SecondVariation sv = second_variation_check(1, 1, h, 1e-3, policy());
  EXPECT_NEAR(sv.rhs, kFourPiSq, 1e-12);
  EXPECT_LT(std::abs(sv.lhs - sv.rhs) / sv.rhs, 1e-2);
}

TEST(SecondVariation, DefectIsSecondOrderInT) {
  Rng rng(3);
  const TorusElement h = random_self_adjoint(kGolden, 2, 0.5, rng);
  const double d1 = std::abs([&] { auto s = second_variation_check(1, 0, h, 4e-2, policy()); return s.lhs - s.rhs; }());
  const double d2 = std::abs([&] { auto s = second_variation_check(1, 0, h, 2e-2, policy()); return s.lhs - s.rhs; }());
  const double d3 = std::abs([&] { auto s = second_variation_check(1, 0, h, 1e-2, policy()); return s.lhs - s.rhs; }());
  // E(u w) = E(u) + E(w) for monomial u and E(w) = E(w*), so the energy is even in t
  EXPECT_NEAR(d1 / d2, 4.0, 0.2);
  EXPECT_NEAR(d2 / d3, 4.0, 0.2);
}

TEST(SecondVariation, EnergySplitsOverMonomialFactor) {
  const TruncationPolicy p = policy(32);
  Rng rng(12);
  const TorusElement w = exp_element(cplx(0.0, 0.4) * random_self_adjoint(kGolden, 3, 0.5, rng), p, 1e-16);
  const TorusElement u = monomial(kGolden, 2, -1);
  EXPECT_NEAR(energy_unitary(twisted_mul(u, w, p)), energy_unitary(u) + energy_unitary(w), 1e-9);
  EXPECT_NEAR(energy_unitary(adjoint(w)), energy_unitary(w), 1e-10);
}

TEST(SecondVariation, Errors) {
  EXPECT_THROW(second_variation_check(1, 0, monomial(kGolden, 1, 0), 1e-3, policy()), DomainError);
  EXPECT_THROW(second_variation_check(1, 0, identity(kGolden), 0.0, policy()), DomainError);
}

TEST(Probe, ZeroMagnitudeStaysAtMonomial) {
  ProbeConfig cfg;
  cfg.magnitude = 0.0;
  cfg.steps = 20;
  const ProbeSummary s = conjecture_probe(kGolden, 2, 1, 3, 5, cfg, policy());
  EXPECT_EQ(s.to_minimizer, 3);
  EXPECT_EQ(s.elsewhere, 0);
  for (const auto& t : s.trials) {
    EXPECT_EQ(t.distance, 0.0);
    EXPECT_EQ(t.steps, 0);
  }
}

TEST(Probe, IdentityComponentFlowsToScalars) {
  ProbeConfig cfg;
  cfg.magnitude = 0.05;
  cfg.steps = 600;
  cfg.flow.grad_tol = 1e-5;
  const TruncationPolicy p{10, 1e-4, GrowthMode::grow_exact};
  const ProbeSummary s = conjecture_probe(kGolden, 0, 0, 2, 6, cfg, p);
  for (const auto& t : s.trials) {
    EXPECT_LT(t.terminal_energy, 1e-6);
    EXPECT_LT(t.terminal_energy, t.initial_energy);
  }
  EXPECT_EQ(s.to_minimizer, 2);
}

TEST(Probe, GeneratorComponentFlowsToGenerator) {
  ProbeConfig cfg;
  cfg.magnitude = 0.05;
  cfg.steps = 600;
  cfg.flow.grad_tol = 1e-5;
  const TruncationPolicy p{10, 1e-4, GrowthMode::grow_exact};
  const ProbeSummary s = conjecture_probe(kGolden, 1, 0, 2, 7, cfg, p);
  EXPECT_NEAR(s.target_energy, 2.0 * kPi * kPi, 1e-12);
  for (const auto& t : s.trials) {
    EXPECT_LT(std::abs(t.terminal_energy - s.target_energy), 1e-4);
    EXPECT_LT(t.distance, 1e-2);
  }
  EXPECT_EQ(s.to_minimizer, 2);
  EXPECT_THROW(conjecture_probe(kGolden, 1, 0, 0, 7, cfg, p), DomainError);
}

TEST(Probe, DeterministicAcrossThreadCounts) {
  ProbeConfig cfg;
  cfg.magnitude = 0.05;
  cfg.steps = 20;
  const TruncationPolicy p{10, 1e-4, GrowthMode::grow_exact};
  set_thread_count(1);
  const ProbeSummary a = conjecture_probe(kGolden, 1, 0, 3, 11, cfg, p);
  set_thread_count(3);
  const ProbeSummary b = conjecture_probe(kGolden, 1, 0, 3, 11, cfg, p);
  set_thread_count(1);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].terminal_energy, b.trials[i].terminal_energy);
    EXPECT_EQ(a.trials[i].distance, b.trials[i].distance);
  }
}

#pragma once

// Experiment runners behind `nctorus run`. Each runner writes its artifacts
// into the output directory and returns the JSON report plus an exit code:
// 0 success, 2 solver stall / non-convergence, 1 validation error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "nctorus/harness/config.hpp"
#include "nctorus/nctorus.hpp"

namespace nctorus::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitStall = 2;

struct RunResult {
  int exit_code = kExitOk;
  json report;
};

// ---------------------------------------------------------------------------
// Artifact writers

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write '" + path.string() + "'");
    row_strings(header);
  }

  template <class... T>
  void row(const T&... values) {
    std::vector<std::string> cells{cell(values)...};
    row_strings(cells);
  }

 private:
  static std::string cell(double v) { return format_decimal(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

/// JSON numbers cannot carry inf/nan; those become strings.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

// ---------------------------------------------------------------------------
// Parameter readers (nested objects are validated like the top level)

inline ContinuationConfig read_continuation(const json& obj, std::vector<std::string>& problems) {
  detail::Reader r(obj, "config.params.continuation",
                   {"t_steps", "inner_tol", "inner_max_iter", "newton_tol", "damping", "newton",
                    "newton_max_iter", "linear_max_iter", "max_bisections", "exp_tol"},
                   problems);
  ContinuationConfig c;
  c.t_steps = static_cast<int>(r.integer("t_steps", c.t_steps));
  c.inner_tol = r.number("inner_tol", c.inner_tol);
  c.inner_max_iter = static_cast<int>(r.integer("inner_max_iter", c.inner_max_iter));
  c.newton_tol = r.number("newton_tol", c.newton_tol);
  c.damping = r.number("damping", c.damping);
  c.newton = r.boolean("newton", c.newton);
  c.newton_max_iter = static_cast<int>(r.integer("newton_max_iter", c.newton_max_iter));
  c.linear_max_iter = static_cast<int>(r.integer("linear_max_iter", c.linear_max_iter));
  c.max_bisections = static_cast<int>(r.integer("max_bisections", c.max_bisections));
  c.exp_tol = r.number("exp_tol", c.exp_tol);
  return c;
}

inline FlowConfig read_flow(const json& obj, std::vector<std::string>& problems) {
  detail::Reader r(obj, "config.params.flow",
                   {"initial_step", "max_step", "min_step", "grad_tol", "defect_ceiling",
                    "reunitarize_every", "armijo", "exp_tol"},
                   problems);
  FlowConfig f;
  f.initial_step = r.number("initial_step", f.initial_step);
  f.max_step = r.number("max_step", f.max_step);
  f.min_step = r.number("min_step", f.min_step);
  f.grad_tol = r.number("grad_tol", f.grad_tol);
  f.defect_ceiling = r.number("defect_ceiling", f.defect_ceiling);
  f.reunitarize_every = static_cast<int>(r.integer("reunitarize_every", f.reunitarize_every));
  f.armijo = r.number("armijo", f.armijo);
  f.exp_tol = r.number("exp_tol", f.exp_tol);
  if (f.reunitarize_every < 1) problems.push_back("config.params.flow.reunitarize_every must be >= 1");
  if (!(f.initial_step > 0.0) || !(f.min_step > 0.0) || !(f.max_step >= f.initial_step))
    problems.push_back("config.params.flow step sizes must satisfy 0 < initial_step <= max_step, min_step > 0");
  return f;
}

inline TorusElement load_input(const ExperimentConfig& cfg, const std::string& name) {
  const auto path = cfg.input(name);
  if (!path) throw ConfigError({"config.inputs." + name + " is required"});
  ElementParse p = read_element_file(*path);
  if (!p.ok()) {
    std::vector<std::string> problems;
    for (const auto& e : p.errors) problems.push_back("inputs." + name + ": " + e);
    throw ConfigError(problems);
  }
  if (p.element->theta() != cfg.theta)
    throw ConfigError({"inputs." + name + ": theta differs from the configured theta"});
  if (p.element->radius() > cfg.policy.max_radius)
    throw ConfigError({"inputs." + name + ": support radius exceeds policy.max_radius"});
  return std::move(*p.element);
}

inline json element_summary(const TorusElement& a) {
  return {{"support_radius", a.radius()},
          {"tail_mass", num(a.tail_mass())},
          {"l1_norm", num(l1_norm(a))},
          {"l2_norm", num(l2_norm(a))},
          {"h1_norm", num(sobolev_norm(a, 1))},
          {"trace", {num(trace(a).real()), num(trace(a).imag())}}};
}

// ---------------------------------------------------------------------------
// Identity suite

struct IdentityDefects {
  double commutation = 0.0;
  double integration_by_parts = 0.0;
  double trace_property = 0.0;
  double laplacian_factorization = 0.0;
  double constant_term = 0.0;
  double bootstrap_submultiplicativity = 0.0;
  double leibniz = 0.0;

  double max() const {
    return std::max({commutation, integration_by_parts, trace_property, laplacian_factorization,
                     constant_term, bootstrap_submultiplicativity, leibniz});
  }
};

/// Normalized defects of the algebraic identities over random pairs:
/// each is the raw defect divided by the natural size of the terms involved.
inline IdentityDefects identity_suite(double theta, int pairs, int radius, double rho, std::uint64_t seed) {
  Rng rng(seed);
  IdentityDefects d;
  TruncationPolicy exact{4 * radius + 2, 1e-300, GrowthMode::grow_exact};

  const TorusElement U = monomial(theta, 1, 0), V = monomial(theta, 0, 1);
  d.commutation = max_abs_diff(twisted_mul(U, V, exact), unit_phase(1, theta) * twisted_mul(V, U, exact));

  for (int i = 0; i < pairs; ++i) {
    const TorusElement a = random_element(theta, radius, rho, rng);
    const TorusElement b = random_element(theta, radius, rho, rng);
    const double la = l1_norm(a), lb = l1_norm(b);
    const double deriv_scale = kTwoPi * (1 + radius);
    for (int j = 1; j <= 2; ++j) {
      const cplx lhs = trace(twisted_mul(derive(a, j), b, exact));
      const cplx rhs = trace(twisted_mul(derive(b, j), a, exact));
      d.integration_by_parts = std::max(d.integration_by_parts, std::abs(lhs + rhs) / (la * lb * deriv_scale));

      const TorusElement ab = twisted_mul(a, b, exact);
      const TorusElement leib = twisted_mul(derive(a, j), b, exact) + twisted_mul(a, derive(b, j), exact);
      d.leibniz = std::max(d.leibniz, max_abs_diff(derive(ab, j), leib) / (la * lb * deriv_scale));
    }
    const TorusElement ab = twisted_mul(a, b, exact);
    const TorusElement ba = twisted_mul(b, a, exact);
    d.trace_property = std::max(d.trace_property, std::abs(trace(ab) - trace(ba)) / (la * lb));

    const double lap_scale = kFourPiSq * 2.0 * radius * radius * la;
    d.laplacian_factorization =
        std::max(d.laplacian_factorization, max_abs_diff(4.0 * dholo(dbar(a)), laplacian(a)) / lap_scale);
    d.constant_term = std::max(d.constant_term, constant_term_check(a));

    for (int k = 1; k <= 2; ++k) {
      const double nab = bootstrap_norm(ab, k);
      const double bound = bootstrap_norm(a, k) * bootstrap_norm(b, k);
      d.bootstrap_submultiplicativity = std::max(d.bootstrap_submultiplicativity, std::max(0.0, nab - bound) / bound);
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Runners

namespace run_detail {

namespace fs = std::filesystem;

inline json base_report(const ExperimentConfig& cfg) {
  return {{"schema_version", kSchemaVersion},
          {"kind", to_string(cfg.kind)},
          {"theta", cfg.theta_text},
          {"theta_parsed", format_decimal(cfg.theta)},
          {"seed", cfg.seed},
          {"policy",
           {{"max_radius", cfg.policy.max_radius},
            {"tail_tol", cfg.policy.tail_tol},
            {"growth_mode", cfg.policy.growth_mode == GrowthMode::grow_exact ? "grow-exact" : "project"}}}};
}

inline void finish(std::vector<std::string>& problems) {
  if (!problems.empty()) throw ConfigError(problems);
}

inline RunResult run_diagonal(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  const TorusElement f = load_input(cfg, "f");
  json rep = base_report(cfg);
  TorusElement sol(cfg.theta, 0);
  double check = 0.0;
  if (cfg.kind == ExperimentKind::helmholtz) {
    const double lambda = p.number("lambda", 0.0, true);
    if (p.has("lambda") && !(lambda > 0.0)) problems.push_back("config.params.lambda must be positive");
    finish(problems);
    sol = solve_helmholtz(f, lambda);
    check = l2_norm(lambda * sol - laplacian(sol) - f) / std::max(1.0, l2_norm(f));
    rep["lambda"] = lambda;
  } else {
    const double tol = p.number("trace_tol", 1e-12);
    finish(problems);
    if (cfg.kind == ExperimentKind::poisson) {
      sol = solve_poisson(f, tol);
      check = l2_norm(laplacian(sol) - f) / std::max(1.0, l2_norm(f));
    } else {
      sol = solve_dbar(f, tol);
      check = l2_norm(dbar(sol) - f) / std::max(1.0, l2_norm(f));
    }
  }
  save_element(sol, out / "solution.json");
  rep["verdict"] = "success";
  rep["relative_operator_residual"] = num(check);
  rep["solution"] = element_summary(sol);
  return {kExitOk, rep};
}

inline RunResult run_liouville(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  const double mu = p.number("mu", 1.0);
  if (!(mu > 0.0)) problems.push_back("config.params.mu must be positive");
  const ContinuationConfig cc = read_continuation(p.object("continuation"), problems);
  const long long q_min = p.integer("q_min", 144);
  const int grid = static_cast<int>(p.integer("phase_grid", 8));
  const bool has_scalar = p.has("source_scalar");
  const double scalar = p.number("source_scalar", 0.0);
  if (has_scalar == cfg.input("a").has_value())
    problems.push_back("liouville needs exactly one of config.inputs.a and config.params.source_scalar");
  if (q_min < 1 || grid < 1) problems.push_back("config.params.q_min and phase_grid must be positive");
  finish(problems);

  const TorusElement a = has_scalar ? scalar_element(cfg.theta, scalar) : load_input(cfg, "a");
  LiouvilleOptions opts{approximant_with_min_q(cfg.theta, q_min), grid};
  json rep = base_report(cfg);
  rep["mu"] = mu;
  rep["approximant"] = {{"p", opts.approx.p}, {"q", opts.approx.q}, {"depth", opts.approx.depth}};

  try {
    const LiouvilleSolution sol = solve_liouville(a, mu, cc, cfg.policy, opts);
    const SolveReport& r = sol.report;
    CsvWriter csv(out / "continuation.csv", {"t", "inner_iterations", "residual_l2", "lagrangian"});
    for (const auto& pt : r.path) csv.row(pt.t, pt.inner_iterations, pt.residual_l2, pt.lagrangian);
    save_element(sol.u, out / "solution.json");
    rep["verdict"] = r.converged ? "converged" : "not_converged";
    rep["solve_report"] = {
        {"converged", r.converged},
        {"residual_l2", num(r.residual_l2)},
        {"iterations_per_step", [&] {
           json it = json::array();
           for (const auto& pt : r.path) it.push_back(pt.inner_iterations);
           return it;
         }()},
        {"newton_iterations", r.newton_iterations},
        {"tail_mass_total", num(r.tail_mass_total)},
        {"trace_conservation_gap", num(r.trace_conservation_gap)},
        {"spectral_bound_check", {num(r.spectral_bound_check.min), num(r.spectral_bound_check.max)}},
        {"apriori_interval", {num(r.apriori_lower), num(r.apriori_upper)}},
        {"substitution_slack", num(r.substitution_slack)},
        {"lagrangian_monotone_at_t1", r.lagrangian_monotone},
        {"bootstrap_norm1", num(r.bootstrap_norm1)},
        {"bootstrap_norm2", num(r.bootstrap_norm2)}};
    rep["solution"] = element_summary(sol.u);
    return {r.converged ? kExitOk : kExitStall, rep};
  } catch (const ContinuationStall& e) {
    CsvWriter csv(out / "continuation.csv", {"t", "inner_iterations", "residual_l2", "lagrangian"});
    for (const auto& pt : e.path()) csv.row(pt.t, pt.inner_iterations, pt.residual_l2, pt.lagrangian);
    rep["verdict"] = "continuation_stall";
    rep["message"] = e.what();
    return {kExitStall, rep};
  }
}

inline void write_flow_csv(const fs::path& path, const FlowTrace& tr) {
  CsvWriter csv(path, {"step", "energy", "grad_norm", "unitarity_defect", "step_size"});
  for (std::size_t i = 0; i < tr.records.size(); ++i) {
    const auto& r = tr.records[i];
    csv.row(i, r.energy, r.gradient_norm_l2, r.unitarity_defect, r.step_size);
  }
}

inline RunResult run_flow(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  const int m = static_cast<int>(p.integer("m", 1));
  const int n = static_cast<int>(p.integer("n", 0));
  const double magnitude = p.number("magnitude", 0.1);
  const double rho = p.number("rho", 0.5);
  const int pr = static_cast<int>(p.integer("perturbation_radius", 3));
  const int steps = static_cast<int>(p.integer("steps", 2000));
  const FlowConfig fc = read_flow(p.object("flow"), problems);
  if (steps < 0 || pr < 0) problems.push_back("config.params.steps and perturbation_radius must be nonnegative");
  finish(problems);

  TorusElement u0 = identity(cfg.theta);
  if (cfg.input("u0")) {
    u0 = load_input(cfg, "u0");
  } else {
    Rng rng(cfg.seed);
    const TorusElement h = random_self_adjoint(cfg.theta, pr, rho, rng);
    u0 = twisted_mul(monomial(cfg.theta, m, n), exp_element(cplx(0.0, magnitude) * h, cfg.policy, fc.exp_tol),
                     cfg.policy);
  }
  const FlowTrace tr = gradient_flow(u0, steps, fc, cfg.policy);
  write_flow_csv(out / "flow.csv", tr);
  save_element(tr.terminal, out / "terminal.json");
  json rep = base_report(cfg);
  rep["verdict"] = to_string(tr.verdict);
  rep["accepted_steps"] = tr.accepted_steps();
  rep["initial_energy"] = num(tr.records.front().energy);
  rep["terminal_energy"] = num(tr.records.back().energy);
  rep["terminal_gradient_norm"] = num(tr.records.back().gradient_norm_l2);
  rep["terminal_unitarity_defect"] = num(tr.records.back().unitarity_defect);
  if (!cfg.input("u0")) rep["distance_to_monomial_circle"] = num(distance_to_monomial_circle(tr.terminal, m, n));
  return {tr.verdict == FlowVerdict::converged ? kExitOk : kExitStall, rep};
}

inline RunResult run_probe(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  ProbeConfig pc;
  const int m = static_cast<int>(p.integer("m", 1));
  const int n = static_cast<int>(p.integer("n", 0));
  const int trials = static_cast<int>(p.integer("trials", 4));
  pc.magnitude = p.number("magnitude", pc.magnitude);
  pc.rho = p.number("rho", pc.rho);
  pc.perturbation_radius = static_cast<int>(p.integer("perturbation_radius", pc.perturbation_radius));
  pc.steps = static_cast<int>(p.integer("steps", pc.steps));
  pc.energy_tol = p.number("energy_tol", pc.energy_tol);
  pc.distance_tol = p.number("distance_tol", pc.distance_tol);
  pc.flow = read_flow(p.object("flow"), problems);
  if (trials < 1) problems.push_back("config.params.trials must be >= 1");
  finish(problems);

  const ProbeSummary s = conjecture_probe(cfg.theta, m, n, trials, cfg.seed, pc, cfg.policy);
  json records = json::array();
  for (const auto& t : s.trials)
    records.push_back({{"initial_energy", num(t.initial_energy)},
                       {"terminal_energy", num(t.terminal_energy)},
                       {"terminal_gradient_norm", num(t.terminal_gradient)},
                       {"distance_to_monomial_circle", num(t.distance)},
                       {"accepted_steps", t.steps},
                       {"verdict", to_string(t.verdict)},
                       {"at_conjectured_minimizer", t.at_conjectured_minimizer}});
  json summary = {{"m", m},
                  {"n", n},
                  {"seed", s.seed},
                  {"magnitude", pc.magnitude},
                  {"target_energy", num(s.target_energy)},
                  {"trials", records},
                  {"to_conjectured_minimizer", s.to_minimizer},
                  {"elsewhere", s.elsewhere}};
  write_json(out / "probe.json", summary);
  json rep = base_report(cfg);
  rep["verdict"] = "success";
  rep["to_conjectured_minimizer"] = s.to_minimizer;
  rep["elsewhere"] = s.elsewhere;
  return {kExitOk, rep};
}

inline RunResult run_scan(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  const int radius = static_cast<int>(p.integer("radius", 8));
  ScanRectangle rect;
  rect.x_min = p.number("x_min", rect.x_min);
  rect.x_max = p.number("x_max", rect.x_max);
  rect.y_min = p.number("y_min", rect.y_min);
  rect.y_max = p.number("y_max", rect.y_max);
  rect.x_count = static_cast<int>(p.integer("x_count", rect.x_count));
  rect.y_count = static_cast<int>(p.integer("y_count", rect.y_count));
  KernelScanOptions ko;
  ko.smallest_count = static_cast<int>(p.integer("smallest_count", ko.smallest_count));
  ko.relative_threshold = p.number("relative_threshold", ko.relative_threshold);
  if (radius < 1 || rect.x_count < 1 || rect.y_count < 1 || ko.smallest_count < 1)
    problems.push_back("config.params: radius, grid counts and smallest_count must be positive");
  finish(problems);

  const TorusElement f0 = cfg.input("f0") ? load_input(cfg, "f0") : TorusElement(cfg.theta, 0);
  const auto pts = cr_kernel_grid(f0, radius, rect, ko);
  CsvWriter csv(out / "scan.csv", {"re_tau_f", "im_tau_f", "sigma_min", "kernel_dim_estimate"});
  int hits = 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& pt : pts) {
    csv.row(pt.trace_f.real(), pt.trace_f.imag(), pt.sigma_min, pt.kernel_dim_estimate);
    hits += pt.kernel_dim_estimate > 0;
    smallest = std::min(smallest, pt.sigma_min);
  }
  json rep = base_report(cfg);
  rep["verdict"] = "success";
  rep["grid_points"] = pts.size();
  rep["points_with_kernel"] = hits;
  rep["smallest_sigma_min"] = num(smallest);
  return {kExitOk, rep};
}

inline RunResult run_spectra(const ExperimentConfig& cfg, const fs::path& out) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  const long long q_min = p.integer("q_min", 89);
  const int grid = static_cast<int>(p.integer("phase_grid", 8));
  if (q_min < 1 || grid < 1) problems.push_back("config.params.q_min and phase_grid must be positive");
  finish(problems);

  const TorusElement h = load_input(cfg, "h");
  const RationalApproximant approx = approximant_with_min_q(cfg.theta, q_min);
  const auto samples = spectrum_samples(h, approx, grid);
  CsvWriter csv(out / "spectra.csv", {"q", "p", "z1_angle", "z2_angle", "eigenvalue_index", "eigenvalue"});
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : samples)
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
      csv.row(approx.q, approx.p, s.phase.angle1, s.phase.angle2, static_cast<long long>(i), s.eigenvalues(i));
      lo = std::min(lo, s.eigenvalues(i));
      hi = std::max(hi, s.eigenvalues(i));
    }
  const MaxStateResult ms = max_state_check(h, approx, grid);
  const NormBracket nb = opnorm_bracket(h, approx, grid);
  json rep = base_report(cfg);
  rep["verdict"] = "success";
  rep["approximant"] = {{"p", approx.p}, {"q", approx.q}, {"depth", approx.depth}};
  rep["spectral_bounds"] = {num(lo), num(hi)};
  rep["max_state_check"] = {{"phi_h", num(ms.phi_h)},
                            {"phi_lap_h", num(ms.phi_lap_h)},
                            {"degenerate_top_eigenspace", ms.degenerate}};
  rep["opnorm_bracket"] = {num(nb.lower), num(nb.upper)};
  rep["substitution_slack"] = num(substitution_slack(cfg.theta, approx, h.radius()));
  return {kExitOk, rep};
}

inline RunResult run_identities(const ExperimentConfig& cfg, const fs::path&) {
  std::vector<std::string> problems;
  detail::Reader p(cfg.params, "config.params", detail::schema_for(cfg.kind).params, problems);
  const int pairs = static_cast<int>(p.integer("pairs", 100));
  const int radius = static_cast<int>(p.integer("radius", 8));
  const double rho = p.number("rho", 0.5);
  if (pairs < 1 || radius < 1) problems.push_back("config.params.pairs and radius must be positive");
  finish(problems);
  const IdentityDefects d = identity_suite(cfg.theta, pairs, radius, rho, cfg.seed);
  json rep = base_report(cfg);
  rep["verdict"] = "success";
  rep["pairs"] = pairs;
  rep["radius"] = radius;
  rep["max_defects"] = {{"commutation", num(d.commutation)},
                        {"integration_by_parts", num(d.integration_by_parts)},
                        {"trace_property", num(d.trace_property)},
                        {"laplacian_factorization", num(d.laplacian_factorization)},
                        {"constant_term", num(d.constant_term)},
                        {"bootstrap_submultiplicativity", num(d.bootstrap_submultiplicativity)},
                        {"leibniz", num(d.leibniz)}};
  rep["max_defect"] = num(d.max());
  return {kExitOk, rep};
}

}  // namespace run_detail

/// Runs the configured experiment, writing report.json and the kind's
/// artifacts into out_dir. Library errors map to exit 1 (validation and
/// domain problems) or 2 (solver stalls).
inline RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunResult res;
  try {
    switch (cfg.kind) {
      case ExperimentKind::helmholtz:
      case ExperimentKind::poisson:
      case ExperimentKind::dbar: res = run_detail::run_diagonal(cfg, out_dir); break;
      case ExperimentKind::liouville: res = run_detail::run_liouville(cfg, out_dir); break;
      case ExperimentKind::flow: res = run_detail::run_flow(cfg, out_dir); break;
      case ExperimentKind::probe: res = run_detail::run_probe(cfg, out_dir); break;
      case ExperimentKind::scan: res = run_detail::run_scan(cfg, out_dir); break;
      case ExperimentKind::spectra: res = run_detail::run_spectra(cfg, out_dir); break;
      case ExperimentKind::identities: res = run_detail::run_identities(cfg, out_dir); break;
    }
  } catch (const ConfigError& e) {
    json problems = e.problems();
    res = {kExitValidation, {{"error", {{"kind", e.kind()}, {"messages", problems}}}}};
  } catch (const ContinuationStall& e) {
    res = {kExitStall, {{"error", {{"kind", e.kind()}, {"messages", {e.what()}}}}}};
  } catch (const Error& e) {
    const bool stall = std::string(e.kind()) == "conditioning" || std::string(e.kind()) == "truncation_overflow";
    res = {stall ? kExitStall : kExitValidation, {{"error", {{"kind", e.kind()}, {"messages", {e.what()}}}}}};
  }
  res.report["exit_code"] = res.exit_code;
  write_json(out_dir / (res.report.contains("error") ? "error.json" : "report.json"), res.report);
  return res;
}

}  // namespace nctorus::harness

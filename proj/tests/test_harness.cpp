#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "nctorus/harness/config.hpp"
#include "nctorus/harness/experiments.hpp"

using namespace nctorus;
using namespace nctorus::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kSamples = NCTORUS_SAMPLES;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nctorus_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

json base_doc(const std::string& kind) {
  return {{"schema_version", 1}, {"kind", kind}, {"theta", "0.6180339887498949"}};
}

std::vector<std::string> problems_of(const json& doc) {
  try {
    parse_config(doc, kSamples);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& needle) {
  for (const auto& p : problems)
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string("\"") + NCTORUS_CLI + "\" " + args + " > \"" + stdout_file.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, AcceptsMinimalIdentities) {
  const ExperimentConfig cfg = parse_config(base_doc("identities"));
  EXPECT_EQ(cfg.kind, ExperimentKind::identities);
  EXPECT_EQ(cfg.theta, 0.6180339887498949);
  EXPECT_EQ(cfg.theta_text, "0.6180339887498949");
  EXPECT_EQ(cfg.policy.growth_mode, GrowthMode::grow_exact);
}

TEST(Config, RejectsUnknownKeys) {
  json doc = base_doc("identities");
  doc["colour"] = "blue";
  EXPECT_TRUE(mentions(problems_of(doc), "colour"));
  doc = base_doc("identities");
  doc["policy"] = {{"max_radius", 8}, {"tail_toll", 1e-3}};
  EXPECT_TRUE(mentions(problems_of(doc), "tail_toll"));
  doc = base_doc("identities");
  doc["params"] = {{"pairz", 3}};
  EXPECT_TRUE(mentions(problems_of(doc), "pairz"));
}

TEST(Config, RejectsBadTheta) {
  for (const json& t : {json("0"), json("1.5"), json("abc"), json(0.5), json("")}) {
    json doc = base_doc("identities");
    doc["theta"] = t;
    EXPECT_TRUE(mentions(problems_of(doc), "theta")) << t.dump();
  }
  json doc = base_doc("identities");
  doc.erase("theta");
  EXPECT_TRUE(mentions(problems_of(doc), "theta"));
}

TEST(Config, RejectsBadKindAndVersion) {
  EXPECT_TRUE(mentions(problems_of(base_doc("teleport")), "kind"));
  json doc = base_doc("identities");
  doc["schema_version"] = 2;
  EXPECT_TRUE(mentions(problems_of(doc), "schema_version"));
  doc.erase("schema_version");
  EXPECT_TRUE(mentions(problems_of(doc), "schema_version"));
}

TEST(Config, CollectsEveryProblem) {
  json doc = base_doc("teleport");
  doc["theta"] = "2";
  doc["policy"] = {{"growth_mode", "sideways"}, {"max_radius", 0}};
  const auto p = problems_of(doc);
  EXPECT_GE(p.size(), 4u);
}

TEST(Config, RequiredInputsAndPaths) {
  EXPECT_TRUE(mentions(problems_of(base_doc("poisson")), "inputs.f"));
  json doc = base_doc("poisson");
  doc["inputs"] = {{"f", "elements/mean_zero.json"}};
  const ExperimentConfig cfg = parse_config(doc, kSamples);
  ASSERT_TRUE(cfg.input("f").has_value());
  EXPECT_EQ(fs::path(*cfg.input("f")), kSamples / "elements/mean_zero.json");
}

TEST(Run, SamplesSucceed) {
  for (const char* name : {"helmholtz", "poisson", "dbar", "liouville_scalar", "liouville_element", "scan",
                           "spectra", "identities"}) {
    const ExperimentConfig cfg = load_config((kSamples / (std::string(name) + ".json")).string());
    const fs::path out = scratch(name);
    const RunResult res = run_experiment(cfg, out);
    EXPECT_EQ(res.exit_code, kExitOk) << name << ": " << res.report.dump();
    EXPECT_TRUE(fs::exists(out / "report.json")) << name;
    EXPECT_EQ(res.report["theta"], "0.6180339887498949");
    EXPECT_EQ(res.report["theta_parsed"], "0.6180339887498949");
  }
}

TEST(Run, LiouvilleArtifacts) {
  const ExperimentConfig cfg = load_config((kSamples / "liouville_scalar.json").string());
  const fs::path out = scratch("liouville_artifacts");
  const RunResult res = run_experiment(cfg, out);
  ASSERT_EQ(res.exit_code, 0);
  EXPECT_TRUE(fs::exists(out / "continuation.csv"));
  EXPECT_EQ(slurp(out / "continuation.csv").rfind("t,inner_iterations,residual_l2,lagrangian", 0), 0u);
  const TorusElement u = load_element((out / "solution.json").string());
  EXPECT_LT(l1_norm(u - 1.0), 1e-8);
  EXPECT_EQ(res.report["verdict"], "converged");
}

TEST(Run, ValidationErrorsExitOne) {
  json doc = base_doc("poisson");
  doc["inputs"] = {{"f", "elements/source_cos.json"}};
  const fs::path out = scratch("poisson_bad");
  const RunResult res = run_experiment(parse_config(doc, kSamples), out);
  EXPECT_EQ(res.exit_code, kExitValidation);
  EXPECT_TRUE(fs::exists(out / "error.json"));
  EXPECT_FALSE(fs::exists(out / "report.json"));

  doc["inputs"] = {{"f", "elements/duplicate.json"}};
  EXPECT_EQ(run_experiment(parse_config(doc, kSamples), scratch("poisson_dup")).exit_code, kExitValidation);
  doc["inputs"] = {{"f", "elements/missing.json"}};
  EXPECT_EQ(run_experiment(parse_config(doc, kSamples), scratch("poisson_missing")).exit_code, kExitValidation);
}

TEST(Run, StallExitsTwo) {
  json doc = base_doc("liouville");
  doc["inputs"] = {{"a", "elements/source_cos.json"}};
  doc["params"] = {{"continuation",
                    {{"t_steps", 1}, {"inner_max_iter", 1}, {"max_bisections", 0}, {"newton", false}}}};
  const fs::path out = scratch("liouville_stall");
  const RunResult res = run_experiment(parse_config(doc, kSamples), out);
  EXPECT_EQ(res.exit_code, kExitStall) << res.report.dump();
  EXPECT_EQ(res.report["verdict"], "continuation_stall");
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_TRUE(fs::exists(out / "continuation.csv"));
}

TEST(Run, IdentityDefectsAreRoundoff) {
  const IdentityDefects d = identity_suite(0.6180339887498949, 20, 6, 0.5, 3);
  EXPECT_LT(d.max(), 1e-11);
}

TEST(Cli, Version) {
  const fs::path dir = scratch("cli_version");
  EXPECT_EQ(cli("version", dir / "out.txt"), 0);
  EXPECT_EQ(slurp(dir / "out.txt"), "nctorus 1.0.0 (schema_version 1)\n");
}

TEST(Cli, ValidateNorms) {
  const fs::path dir = scratch("cli_validate");
  ASSERT_EQ(cli("validate \"" + (kSamples / "elements/identity.json").string() + "\"", dir / "id.txt"), 0);
  const json id = json::parse(slurp(dir / "id.txt"));
  EXPECT_EQ(id["valid"], true);
  EXPECT_DOUBLE_EQ(id["l1_norm"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(id["l2_norm"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(id["h1_norm"].get<double>(), 1.0);

  ASSERT_EQ(cli("validate \"" + (kSamples / "elements/U.json").string() + "\"", dir / "u.txt"), 0);
  const json u = json::parse(slurp(dir / "u.txt"));
  EXPECT_NEAR(u["h1_norm"].get<double>(), std::sqrt(1.0 + kFourPiSq), 1e-12);

  EXPECT_EQ(cli("validate \"" + (kSamples / "elements/duplicate.json").string() + "\"", dir / "dup.txt"), 1);
  const json dup = json::parse(slurp(dir / "dup.txt"));
  EXPECT_EQ(dup["valid"], false);
  EXPECT_FALSE(dup["errors"].empty());
}

TEST(Cli, RunAndExitCodes) {
  const fs::path dir = scratch("cli_run");
  EXPECT_EQ(cli("run --config \"" + (kSamples / "poisson.json").string() + "\" --out \"" + (dir / "a").string() + "\"",
                dir / "a.txt"),
            0);
  EXPECT_TRUE(fs::exists(dir / "a" / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "a" / "solution.json"));

  std::ofstream(dir / "bad.json") << R"({"schema_version": 1, "kind": "nope", "theta": "0.5"})";
  EXPECT_EQ(cli("run --config \"" + (dir / "bad.json").string() + "\" --out \"" + (dir / "b").string() + "\"",
                dir / "b.txt"),
            1);
  EXPECT_TRUE(fs::exists(dir / "b" / "error.json"));
  EXPECT_EQ(cli("run", dir / "c.txt"), 1);
  EXPECT_EQ(cli("frobnicate", dir / "d.txt"), 1);
}

TEST(Cli, DeterministicArtifactsAndSeedOverride) {
  const fs::path dir = scratch("cli_determinism");
  const std::string cfg = "\"" + (kSamples / "identities.json").string() + "\"";
  ASSERT_EQ(cli("run --config " + cfg + " --out \"" + (dir / "a").string() + "\"", dir / "a.txt"), 0);
  ASSERT_EQ(cli("--threads 2 run --config " + cfg + " --out \"" + (dir / "b").string() + "\"", dir / "b.txt"), 0);
  EXPECT_EQ(slurp(dir / "a" / "report.json"), slurp(dir / "b" / "report.json"));

  ASSERT_EQ(cli("run --config " + cfg + " --seed 99 --out \"" + (dir / "c").string() + "\"", dir / "c.txt"), 0);
  const json c = json::parse(slurp(dir / "c" / "report.json"));
  EXPECT_EQ(c["seed"], 99);
  EXPECT_NE(slurp(dir / "a" / "report.json"), slurp(dir / "c" / "report.json"));

  const std::string scan = "\"" + (kSamples / "scan.json").string() + "\"";
  ASSERT_EQ(cli("run --config " + scan + " --out \"" + (dir / "s1").string() + "\"", dir / "s1.txt"), 0);
  ASSERT_EQ(cli("run --config " + scan + " --threads 3 --out \"" + (dir / "s2").string() + "\"", dir / "s2.txt"), 0);
  EXPECT_EQ(slurp(dir / "s1" / "scan.csv"), slurp(dir / "s2" / "scan.csv"));
}

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nctorus/harness/config.hpp"
#include "nctorus/harness/experiments.hpp"
#include "nctorus/nctorus.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using nctorus::harness::json;

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("NCTORUS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid NCTORUS_THREADS='" << env << "'\n";
  }
  return 1;
}

void print_error(const std::string& kind, const json& messages) {
  json err = {{"error", {{"kind", kind}, {"messages", messages}}}, {"exit_code", 1}};
  std::cout << err.dump(2) << '\n';
}

int command_run(const std::string& config_path, const std::string& out_flag, std::optional<long long> seed) {
  using namespace nctorus::harness;
  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    json messages = e.problems();
    if (!out_flag.empty()) {
      std::filesystem::create_directories(out_flag);
      write_json(std::filesystem::path(out_flag) / "error.json",
                 {{"error", {{"kind", e.kind()}, {"messages", messages}}}, {"exit_code", 1}});
    }
    print_error(e.kind(), messages);
    return kExitValidation;
  }
  if (seed) {
    if (*seed < 0) {
      print_error("validation", {"--seed must be nonnegative"});
      return kExitValidation;
    }
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }
  const std::filesystem::path out = out_flag.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_flag);
  const RunResult res = run_experiment(cfg, out);
  std::cout << res.report.dump(2) << '\n';
  return res.exit_code;
}

int command_validate(const std::string& path) {
  using nctorus::format_decimal;
  nctorus::ElementParse p = nctorus::read_element_file(path);
  if (!p.ok()) {
    json errors = p.errors;
    std::cout << json{{"valid", false}, {"errors", errors}}.dump(2) << '\n';
    return 1;
  }
  const nctorus::TorusElement& a = *p.element;
  json rep = {{"valid", true},
              {"theta", format_decimal(a.theta())},
              {"support_radius", a.radius()},
              {"tail_mass", a.tail_mass()},
              {"l1_norm", nctorus::l1_norm(a)},
              {"l2_norm", nctorus::l2_norm(a)},
              {"h1_norm", nctorus::sobolev_norm(a, 1)},
              {"self_adjoint_defect", nctorus::self_adjoint_defect(a)}};
  std::cout << rep.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on the noncommutative torus"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (fallback: NCTORUS_THREADS)")->check(CLI::PositiveNumber);

  std::string config_path, out_dir;
  std::optional<long long> seed;
  auto* run = app.add_subcommand("run", "run an experiment described by a config file");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--seed", seed, "seed (overrides the config)");
  run->add_option("--threads", threads, "worker threads (fallback: NCTORUS_THREADS)")->check(CLI::PositiveNumber);

  std::string element_path;
  auto* validate = app.add_subcommand("validate", "check an element file and print its norms");
  validate->add_option("element", element_path, "element file (JSON)")->required();

  app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  nctorus::set_thread_count(resolve_threads(threads));

  if (*run) return command_run(config_path, out_dir, seed);
  if (*validate) return command_validate(element_path);
  std::cout << "nctorus " << kVersion << " (schema_version " << nctorus::harness::kSchemaVersion << ")\n";
  return 0;
}

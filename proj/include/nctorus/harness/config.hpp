#pragma once

// Experiment configuration (schema_version 1). Every object is checked
// against an explicit key list; unknown keys are validation errors.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nctorus/element.hpp"
#include "nctorus/errors.hpp"
#include "nctorus/io.hpp"

namespace nctorus::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Validation failure carrying an itemized list of problems.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }
  const char* kind() const noexcept override { return "validation"; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s;
    for (const auto& x : p) s += (s.empty() ? "" : "; ") + x;
    return s;
  }
  std::vector<std::string> problems_;
};

enum class ExperimentKind { helmholtz, poisson, dbar, liouville, flow, probe, scan, spectra, identities };

inline const std::vector<std::pair<std::string, ExperimentKind>>& kind_names() {
  static const std::vector<std::pair<std::string, ExperimentKind>> names{
      {"helmholtz", ExperimentKind::helmholtz}, {"poisson", ExperimentKind::poisson},
      {"dbar", ExperimentKind::dbar},           {"liouville", ExperimentKind::liouville},
      {"flow", ExperimentKind::flow},           {"probe", ExperimentKind::probe},
      {"scan", ExperimentKind::scan},           {"spectra", ExperimentKind::spectra},
      {"identities", ExperimentKind::identities}};
  return names;
}

inline std::string to_string(ExperimentKind k) {
  for (const auto& [name, kind] : kind_names())
    if (kind == k) return name;
  return "unknown";
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::identities;
  std::string theta_text;
  double theta = 0.0;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  TruncationPolicy policy;
  std::vector<std::pair<std::string, std::string>> inputs;  ///< name -> resolved path
  json params = json::object();

  std::optional<std::string> input(const std::string& name) const {
    for (const auto& [k, v] : inputs)
      if (k == name) return v;
    return std::nullopt;
  }
};

namespace detail {

/// Collects problems while reading one JSON object with a fixed key set.
class Reader {
 public:
  Reader(const json& obj, std::string where, std::set<std::string> allowed,
         std::vector<std::string>& problems)
      : obj_(obj), where_(std::move(where)), problems_(problems) {
    if (!obj_.is_object()) {
      problems_.push_back(where_ + " must be an object");
      return;
    }
    for (const auto& [key, _] : obj_.items())
      if (!allowed.count(key)) problems_.push_back("unknown key '" + key + "' in " + where_);
  }

  bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

  double number(const std::string& key, double fallback, bool required = false) {
    if (!has(key)) {
      if (required) problems_.push_back(where_ + "." + key + " is required");
      return fallback;
    }
    if (!obj_[key].is_number()) {
      problems_.push_back(where_ + "." + key + " must be a number");
      return fallback;
    }
    return obj_[key].get<double>();
  }

  long long integer(const std::string& key, long long fallback, bool required = false) {
    if (!has(key)) {
      if (required) problems_.push_back(where_ + "." + key + " is required");
      return fallback;
    }
    if (!obj_[key].is_number_integer()) {
      problems_.push_back(where_ + "." + key + " must be an integer");
      return fallback;
    }
    return obj_[key].get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    if (!obj_[key].is_boolean()) {
      problems_.push_back(where_ + "." + key + " must be a boolean");
      return fallback;
    }
    return obj_[key].get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback, bool required = false) {
    if (!has(key)) {
      if (required) problems_.push_back(where_ + "." + key + " is required");
      return fallback;
    }
    if (!obj_[key].is_string()) {
      problems_.push_back(where_ + "." + key + " must be a string");
      return fallback;
    }
    return obj_[key].get<std::string>();
  }

  json object(const std::string& key) const { return has(key) ? obj_[key] : json::object(); }

  void problem(const std::string& p) { problems_.push_back(where_ + ": " + p); }
  const std::string& where() const { return where_; }
  std::vector<std::string>& problems() { return problems_; }

 private:
  json obj_;
  std::string where_;
  std::vector<std::string>& problems_;
};

struct KindSchema {
  std::set<std::string> inputs;
  std::set<std::string> required_inputs;
  std::set<std::string> params;
};

inline KindSchema schema_for(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::helmholtz: return {{"f"}, {"f"}, {"lambda"}};
    case ExperimentKind::poisson: return {{"f"}, {"f"}, {"trace_tol"}};
    case ExperimentKind::dbar: return {{"f"}, {"f"}, {"trace_tol"}};
    case ExperimentKind::liouville:
      return {{"a"}, {}, {"mu", "source_scalar", "continuation", "q_min", "phase_grid"}};
    case ExperimentKind::flow:
      return {{"u0"}, {}, {"m", "n", "magnitude", "rho", "perturbation_radius", "steps", "flow"}};
    case ExperimentKind::probe:
      return {{}, {}, {"m", "n", "trials", "magnitude", "rho", "perturbation_radius", "steps",
                       "energy_tol", "distance_tol", "flow"}};
    case ExperimentKind::scan:
      return {{"f0"}, {}, {"radius", "x_min", "x_max", "y_min", "y_max", "x_count", "y_count",
                           "smallest_count", "relative_threshold"}};
    case ExperimentKind::spectra:
      return {{"h"}, {"h"}, {"q_min", "phase_grid", "max_eigenvalue_rows"}};
    case ExperimentKind::identities: return {{}, {}, {"pairs", "radius", "rho"}};
  }
  return {};
}

}  // namespace detail

/// Validates a parsed config document. Relative input paths resolve against
/// base_dir (the config file's directory).
inline ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir = {}) {
  std::vector<std::string> problems;
  detail::Reader top(doc, "config",
                     {"schema_version", "kind", "theta", "seed", "output_dir", "policy", "inputs", "params"},
                     problems);
  ExperimentConfig cfg;
  if (!doc.is_object()) throw ConfigError(problems);

  const long long version = top.integer("schema_version", 0, true);
  if (top.has("schema_version") && version != kSchemaVersion)
    problems.push_back("unsupported schema_version " + std::to_string(version) + " (expected " +
                       std::to_string(kSchemaVersion) + ")");

  const std::string kind = top.text("kind", "", true);
  bool kind_ok = false;
  for (const auto& [name, k] : kind_names())
    if (name == kind) {
      cfg.kind = k;
      kind_ok = true;
    }
  if (top.has("kind") && !kind_ok) problems.push_back("unknown experiment kind '" + kind + "'");

  cfg.theta_text = top.text("theta", "", true);
  if (top.has("theta") && doc["theta"].is_string()) {
    const auto v = parse_decimal(cfg.theta_text);
    if (!v)
      problems.push_back("config.theta is not a decimal number");
    else if (!(*v > 0.0 && *v < 1.0))
      problems.push_back("config.theta must lie in (0,1)");
    else
      cfg.theta = *v;
  }

  const long long seed = top.integer("seed", 0);
  if (seed < 0) problems.push_back("config.seed must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output_dir = top.text("output_dir", cfg.output_dir);

  {
    detail::Reader pol(top.object("policy"), "config.policy", {"max_radius", "tail_tol", "growth_mode"}, problems);
    cfg.policy.max_radius = static_cast<int>(pol.integer("max_radius", cfg.policy.max_radius));
    cfg.policy.tail_tol = pol.number("tail_tol", cfg.policy.tail_tol);
    const std::string mode = pol.text("growth_mode", "grow-exact");
    if (mode == "grow-exact")
      cfg.policy.growth_mode = GrowthMode::grow_exact;
    else if (mode == "project")
      cfg.policy.growth_mode = GrowthMode::project;
    else
      problems.push_back("config.policy.growth_mode must be 'grow-exact' or 'project'");
    if (cfg.policy.max_radius < 1) problems.push_back("config.policy.max_radius must be >= 1");
    if (!(cfg.policy.tail_tol > 0.0)) problems.push_back("config.policy.tail_tol must be > 0");
  }

  if (kind_ok) {
    const detail::KindSchema schema = detail::schema_for(cfg.kind);
    detail::Reader in(top.object("inputs"), "config.inputs", schema.inputs, problems);
    for (const auto& name : schema.inputs) {
      if (!in.has(name)) {
        if (schema.required_inputs.count(name)) problems.push_back("config.inputs." + name + " is required");
        continue;
      }
      std::filesystem::path p = in.text(name, "");
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      cfg.inputs.emplace_back(name, p.string());
    }
    detail::Reader par(top.object("params"), "config.params", schema.params, problems);
    cfg.params = top.object("params");
  }

  if (!problems.empty()) throw ConfigError(problems);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError({"config file '" + path + "' is not valid JSON"});
  return parse_config(doc, std::filesystem::path(path).parent_path());
}

}  // namespace nctorus::harness

#pragma once

// Element file format:
//   {"theta": "<decimal string>", "coeffs": [[m, n, re, im], ...]}
// with optional "support_radius" and "tail_mass". Writers emit the nonzero
// coefficients sorted by (m, n); readers reject duplicate indices.

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nctorus/element.hpp"

namespace nctorus {

using json = nlohmann::json;

/// Parses a decimal string to the nearest double.
inline std::optional<double> parse_decimal(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) return std::nullopt;
  return v;
}

/// Shortest round-tripping decimal form.
inline std::string format_decimal(double v) {
  for (int prec = 15; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    if (parse_decimal(os.str()) == v) return os.str();
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

/// Outcome of reading an element document; `errors` is empty on success.
struct ElementParse {
  std::optional<TorusElement> element;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty() && element.has_value(); }
};

inline ElementParse parse_element(const json& doc) {
  ElementParse out;
  auto& err = out.errors;
  if (!doc.is_object()) {
    err.push_back("document must be a JSON object");
    return out;
  }
  for (const auto& [key, _] : doc.items())
    if (key != "theta" && key != "coeffs" && key != "support_radius" && key != "tail_mass")
      err.push_back("unknown key '" + key + "'");

  std::optional<double> theta;
  if (!doc.contains("theta")) {
    err.push_back("missing 'theta'");
  } else if (!doc["theta"].is_string()) {
    err.push_back("'theta' must be a decimal string");
  } else {
    theta = parse_decimal(doc["theta"].get<std::string>());
    if (!theta)
      err.push_back("'theta' is not a decimal number");
    else if (!(*theta > 0.0 && *theta < 1.0))
      err.push_back("'theta' must lie in (0,1)");
  }

  struct Entry {
    int m, n;
    cplx c;
  };
  std::vector<Entry> entries;
  if (!doc.contains("coeffs")) {
    err.push_back("missing 'coeffs'");
  } else if (!doc["coeffs"].is_array()) {
    err.push_back("'coeffs' must be an array");
  } else {
    std::set<std::pair<int, int>> seen;
    std::size_t i = 0;
    for (const auto& row : doc["coeffs"]) {
      const std::string where = "coeffs[" + std::to_string(i++) + "]";
      if (!row.is_array() || row.size() != 4 || !row[0].is_number_integer() ||
          !row[1].is_number_integer() || !row[2].is_number() || !row[3].is_number()) {
        err.push_back(where + " must be [m, n, re, im] with integer m, n");
        continue;
      }
      const int m = row[0].get<int>();
      const int n = row[1].get<int>();
      if (!seen.insert({m, n}).second) {
        err.push_back(where + " duplicates index (" + std::to_string(m) + "," + std::to_string(n) +
                      ")");
        continue;
      }
      entries.push_back({m, n, cplx(row[2].get<double>(), row[3].get<double>())});
    }
  }

  int radius = 0;
  for (const auto& e : entries) radius = std::max({radius, std::abs(e.m), std::abs(e.n)});
  if (doc.contains("support_radius")) {
    const auto& r = doc["support_radius"];
    if (!r.is_number_integer() || r.get<long long>() < 0)
      err.push_back("'support_radius' must be a nonnegative integer");
    else if (r.get<long long>() < radius)
      err.push_back("'support_radius' " + std::to_string(r.get<long long>()) +
                    " is smaller than the largest stored index " + std::to_string(radius));
    else
      radius = static_cast<int>(r.get<long long>());
  }
  double tail = 0.0;
  if (doc.contains("tail_mass")) {
    const auto& t = doc["tail_mass"];
    if (!t.is_number() || t.get<double>() < 0.0)
      err.push_back("'tail_mass' must be a nonnegative number");
    else
      tail = t.get<double>();
  }

  if (!err.empty() || !theta) return out;
  TorusElement e(*theta, radius);
  for (const auto& en : entries) e.ref(en.m, en.n) = en.c;
  e.add_tail_mass(tail);
  out.element = std::move(e);
  return out;
}

inline json element_to_json(const TorusElement& a) {
  json coeffs = json::array();
  // for_each walks (m, n) in lexicographic order
  a.for_each_nonzero([&](int m, int n, cplx c) { coeffs.push_back({m, n, c.real(), c.imag()}); });
  return json{{"theta", format_decimal(a.theta())},
              {"support_radius", a.radius()},
              {"tail_mass", a.tail_mass()},
              {"coeffs", std::move(coeffs)}};
}

inline ElementParse read_element_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ElementParse p;
    p.errors.push_back("cannot open element file '" + path + "'");
    return p;
  }
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    ElementParse p;
    p.errors.push_back("element file '" + path + "' is not valid JSON");
    return p;
  }
  return parse_element(doc);
}

/// Throws DomainError listing every schema violation.
inline TorusElement load_element(const std::string& path) {
  ElementParse p = read_element_file(path);
  if (!p.ok()) {
    std::string msg = "invalid element file '" + path + "':";
    for (const auto& e : p.errors) msg += " " + e + ";";
    throw DomainError(msg);
  }
  return std::move(*p.element);
}

inline void save_element(const TorusElement& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write element file '" + path + "'");
  out << element_to_json(a).dump(1) << '\n';
}

}  // namespace nctorus

#pragma once

// Experiment configuration: an INI key-value file with [experiment],
// [parameters] and [output] sections, the family mini-grammar, and
// validation against module preconditions.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "planck/analysis.hpp"
#include "planck/eigenfunction.hpp"
#include "planck/manifold.hpp"
#include "planck/report.hpp"

namespace planck {

/// Configuration error naming the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"green",      "pack",      "smallmass", "sweep",
                                              "largevalue", "hwexample", "mvi",       "weyl"};
  return kinds;
}

// ---------------------------------------------------------------------------
// Family grammar: name ":" param "=" value {"," param "=" value}

struct FamilyDescriptor {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline FamilyDescriptor parse_family_descriptor(const std::string& text) {
  FamilyDescriptor d;
  const std::string s = trim(text);
  const auto colon = s.find(':');
  d.name = trim(s.substr(0, colon));
  if (d.name.empty()) throw std::invalid_argument("empty family name in '" + text + "'");
  if (colon == std::string::npos) return d;
  for (const std::string& kv : split(s.substr(colon + 1), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected param=value, got '" + kv + "'");
    d.params.emplace_back(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  return d;
}

namespace detail {

inline long parse_long(const std::string& field, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(field, "expected an integer, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_u64(const std::string& field, const std::string& v) {
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a non-negative integer, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(field, "expected a non-negative integer, got '" + v + "'");
  return x;
}

inline double parse_double(const std::string& field, const std::string& v) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) throw ConfigError(field, "expected a finite number, got '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& field, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(field, "expected true/false, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& field, const std::string& v) {
  std::vector<double> out;
  for (const std::string& x : split(v, ',')) out.push_back(parse_double(field, x));
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

}  // namespace detail

/// Builds the eigenfunction named by a family descriptor on manifold m.
inline EigenfunctionSpec make_family(const std::string& text, Manifold m) {
  const std::string field = "family '" + text + "'";
  FamilyDescriptor d;
  try {
    d = parse_family_descriptor(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(field, e.what());
  }
  std::map<std::string, std::string> p;
  for (const auto& [k, v] : d.params) {
    if (!p.emplace(k, v).second) throw ConfigError(field, "duplicate parameter '" + k + "'");
  }
  auto allow = [&](std::initializer_list<const char*> names) {
    for (const auto& [k, v] : p) {
      bool ok = false;
      for (const char* n : names) ok = ok || k == n;
      if (!ok) throw ConfigError(field, "unknown parameter '" + k + "'");
    }
  };
  auto need = [&](const char* key) -> const std::string& {
    const auto it = p.find(key);
    if (it == p.end()) throw ConfigError(field, std::string("missing parameter '") + key + "'");
    return it->second;
  };
  auto on = [&](ManifoldKind kind) {
    if (m.kind != kind) {
      throw ConfigError(field, "family lives on " + std::string(to_string(kind)) + ", not " +
                                   std::string(to_string(m.kind)));
    }
  };
  auto as_int = [&](const char* key) {
    const long v = detail::parse_long(field, need(key));
    if (v < 1 || v > LegendreTable::kMaxDegree * 4L) throw ConfigError(field, std::string(key) + " out of range");
    return static_cast<int>(v);
  };
  try {
    if (d.name == "const") {
      allow({});
      return EigenfunctionSpec::constant(m);
    }
    if (d.name == "cos") {
      allow({"k", "phase"});
      on(ManifoldKind::Circle);
      const double phase = p.count("phase") ? detail::parse_double(field, p["phase"]) : 0.0;
      return EigenfunctionSpec::circle_mode(as_int("k"), phase);
    }
    if (d.name == "torus") {
      allow({"N", "preset", "seed"});
      on(ManifoldKind::Torus2);
      const long N = detail::parse_long(field, need("N"));
      const TorusPreset preset = p.count("preset") ? torus_preset_from_string(p["preset"]) : TorusPreset::Full;
      if (preset == TorusPreset::Custom) throw ConfigError(field, "preset must be full, pair or random");
      if (preset != TorusPreset::Random && p.count("seed")) throw ConfigError(field, "seed only applies to preset=random");
      const std::uint64_t seed = p.count("seed") ? detail::parse_u64(field, p["seed"]) : 0;
      return EigenfunctionSpec::torus_mode(N, preset, seed);
    }
    if (d.name == "zonal") {
      allow({"l"});
      on(ManifoldKind::Sphere2);
      return EigenfunctionSpec::zonal(as_int("l"));
    }
    if (d.name == "hw") {
      allow({"k"});
      on(ManifoldKind::Sphere2);
      return EigenfunctionSpec::highest_weight(as_int("k"));
    }
    if (d.name == "sphrand") {
      allow({"l", "seed"});
      on(ManifoldKind::Sphere2);
      const std::uint64_t seed = p.count("seed") ? detail::parse_u64(field, p["seed"]) : 0;
      return EigenfunctionSpec::random_sphere(as_int("l"), seed);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field, "unknown family '" + d.name + "'");
}

// ---------------------------------------------------------------------------

struct ExperimentConfig {
  // [experiment]
  std::string kind = "smallmass";
  std::string manifold = "circle";
  std::vector<std::string> families;
  std::uint64_t seed = 0;
  // [parameters]
  std::optional<double> a;  // default_a(manifold) when absent
  double eps_frac = 0.1;
  double eps_mass = 0.1;
  double delta = 0.3;
  std::vector<double> delta_list{0.4, 0.2, 0.1, 0.05};
  std::vector<double> gamma_list{0.25, 0.5, 0.75, 1.0};
  std::optional<std::vector<double>> center;  // largevalue center in chart coordinates
  std::string threshold = "quantile";         // quantile | fixed
  double c2 = 1.0;
  int quadrature_radial = 32;
  int quadrature_angular = 64;
  double nodal_tolerance = 1e-10;
  std::string hw_mode = "equator";
  std::vector<double> k_list{16, 36, 64};
  double r_pole = 0.5;
  double theta_offset = 0.0;
  double spacing_factor = 0.125;
  bool assert_large_ratio = false;
  // [output]
  std::string output_dir = "planck-out";
  std::vector<std::string> formats{"json", "csv"};

  bool operator==(const ExperimentConfig&) const = default;

  Manifold resolved_manifold() const { return manifold_from_string(manifold); }
  double resolved_a() const { return a.value_or(default_a(resolved_manifold())); }
  std::optional<QuadratureOrders> orders() const {
    if (quadrature_radial == 32 && quadrature_angular == 64) return std::nullopt;
    return QuadratureOrders{quadrature_radial, quadrature_angular};
  }
};

inline boost::property_tree::ptree to_ptree(const ExperimentConfig& c) {
  boost::property_tree::ptree t;
  std::string fams;
  for (std::size_t i = 0; i < c.families.size(); ++i) fams += (i ? "; " : "") + c.families[i];
  t.put("experiment.kind", c.kind);
  t.put("experiment.manifold", c.manifold);
  t.put("experiment.families", fams);
  t.put("experiment.seed", std::to_string(c.seed));
  if (c.a) t.put("parameters.a", format_number(*c.a));
  t.put("parameters.eps_frac", format_number(c.eps_frac));
  t.put("parameters.eps_mass", format_number(c.eps_mass));
  t.put("parameters.delta", format_number(c.delta));
  t.put("parameters.delta_list", detail::join(c.delta_list));
  t.put("parameters.gamma_list", detail::join(c.gamma_list));
  if (c.center) t.put("parameters.center", detail::join(*c.center));
  t.put("parameters.threshold", c.threshold);
  t.put("parameters.c2", format_number(c.c2));
  t.put("parameters.quadrature_radial", std::to_string(c.quadrature_radial));
  t.put("parameters.quadrature_angular", std::to_string(c.quadrature_angular));
  t.put("parameters.nodal_tolerance", format_number(c.nodal_tolerance));
  t.put("parameters.hw_mode", c.hw_mode);
  t.put("parameters.k_list", detail::join(c.k_list));
  t.put("parameters.r_pole", format_number(c.r_pole));
  t.put("parameters.theta_offset", format_number(c.theta_offset));
  t.put("parameters.spacing_factor", format_number(c.spacing_factor));
  t.put("parameters.assert_large_ratio", c.assert_large_ratio ? "true" : "false");
  t.put("output.dir", c.output_dir);
  std::string formats;
  for (std::size_t i = 0; i < c.formats.size(); ++i) formats += (i ? "," : "") + c.formats[i];
  t.put("output.formats", formats);
  return t;
}

inline std::string to_ini(const ExperimentConfig& c) {
  std::ostringstream out;
  boost::property_tree::write_ini(out, to_ptree(c));
  return out.str();
}

inline Json to_json(const ExperimentConfig& c) {
  Json j;
  for (const auto& [section, tree] : to_ptree(c)) {
    Json s;
    for (const auto& [key, value] : tree) s[key] = value.data();
    j[section] = std::move(s);
  }
  return j;
}

/// Applies one key of a section to the config.
inline void apply_setting(ExperimentConfig& c, const std::string& section, const std::string& key,
                          const std::string& raw) {
  const std::string field = section + "." + key;
  const std::string v = trim(raw);
  if (section == "experiment") {
    if (key == "kind") c.kind = v;
    else if (key == "manifold") c.manifold = v;
    else if (key == "families" || key == "family") c.families = split(v, ';');
    else if (key == "seed") c.seed = detail::parse_u64(field, v);
    else throw ConfigError(field, "unknown key");
  } else if (section == "parameters") {
    if (key == "a") c.a = detail::parse_double(field, v);
    else if (key == "eps") c.eps_frac = c.eps_mass = detail::parse_double(field, v);
    else if (key == "eps_frac") c.eps_frac = detail::parse_double(field, v);
    else if (key == "eps_mass") c.eps_mass = detail::parse_double(field, v);
    else if (key == "delta") c.delta = detail::parse_double(field, v);
    else if (key == "delta_list") c.delta_list = detail::parse_list(field, v);
    else if (key == "gamma_list") c.gamma_list = detail::parse_list(field, v);
    else if (key == "center") c.center = detail::parse_list(field, v);
    else if (key == "threshold") c.threshold = v;
    else if (key == "c2") c.c2 = detail::parse_double(field, v);
    else if (key == "quadrature_radial") c.quadrature_radial = static_cast<int>(detail::parse_long(field, v));
    else if (key == "quadrature_angular") c.quadrature_angular = static_cast<int>(detail::parse_long(field, v));
    else if (key == "nodal_tolerance") c.nodal_tolerance = detail::parse_double(field, v);
    else if (key == "hw_mode") c.hw_mode = v;
    else if (key == "k_list") c.k_list = detail::parse_list(field, v);
    else if (key == "r_pole") c.r_pole = detail::parse_double(field, v);
    else if (key == "theta_offset") c.theta_offset = detail::parse_double(field, v);
    else if (key == "spacing_factor") c.spacing_factor = detail::parse_double(field, v);
    else if (key == "assert_large_ratio") c.assert_large_ratio = detail::parse_bool(field, v);
    else throw ConfigError(field, "unknown key");
  } else if (section == "output") {
    if (key == "dir") c.output_dir = v;
    else if (key == "formats") c.formats = split(v, ',');
    else throw ConfigError(field, "unknown key");
  } else {
    throw ConfigError(section, "unknown section");
  }
}

inline ExperimentConfig config_from_ini(std::istream& in, ExperimentConfig base = {}) {
  boost::property_tree::ptree t;
  try {
    boost::property_tree::read_ini(in, t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()), e.message());
  }
  for (const auto& [section, tree] : t) {
    if (tree.empty() && !tree.data().empty()) throw ConfigError(section, "key outside of a section");
    for (const auto& [key, value] : tree) apply_setting(base, section, key, value.data());
  }
  return base;
}

inline ExperimentConfig config_from_file(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  return config_from_ini(in, std::move(base));
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<EigenfunctionSpec> resolve_families(const ExperimentConfig& c) {
  const Manifold m = c.resolved_manifold();
  std::vector<EigenfunctionSpec> out;
  for (const std::string& f : c.families) out.push_back(make_family(f, m));
  return out;
}

inline void validate(const ExperimentConfig& c) {
  bool known = false;
  for (const auto& k : experiment_kinds()) known = known || k == c.kind;
  if (!known) throw ConfigError("experiment.kind", "unknown experiment kind '" + c.kind + "'");
  Manifold m;
  try {
    m = c.resolved_manifold();
  } catch (const std::exception& e) {
    throw ConfigError("experiment.manifold", e.what());
  }
  if (c.kind == "hwexample") {
    if (m.kind != ManifoldKind::Sphere2) throw ConfigError("experiment.manifold", "hwexample runs on the sphere");
  } else if (c.families.empty()) {
    throw ConfigError("experiment.families", "at least one family is required");
  }
  const std::vector<EigenfunctionSpec> fams = resolve_families(c);

  auto in_unit = [](const char* field, double v) {
    if (!(v > 0.0 && v < 1.0)) throw ConfigError(field, "must lie in (0, 1)");
  };
  in_unit("parameters.eps_frac", c.eps_frac);
  in_unit("parameters.eps_mass", c.eps_mass);
  if (c.quadrature_radial < 2) throw ConfigError("parameters.quadrature_radial", "must be >= 2");
  if (c.quadrature_angular < 2) throw ConfigError("parameters.quadrature_angular", "must be >= 2");
  if (!(c.nodal_tolerance > 0.0)) throw ConfigError("parameters.nodal_tolerance", "must be > 0");
  if (c.threshold != "quantile" && c.threshold != "fixed") {
    throw ConfigError("parameters.threshold", "must be quantile or fixed");
  }
  if (!(c.c2 > 0.0)) throw ConfigError("parameters.c2", "must be > 0");
  for (const std::string& f : c.formats) {
    if (f != "json" && f != "csv") throw ConfigError("output.formats", "unknown format '" + f + "'");
  }
  if (c.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");

  const double a = c.resolved_a();
  const bool packs = c.kind == "pack" || c.kind == "smallmass" || c.kind == "sweep" || c.kind == "mvi";
  if (packs) {
    if (!(a > 0.0)) throw ConfigError("parameters.a", "must be > 0");
    for (const auto& u : fams) {
      if (!(u.eigenvalue_sq() > 0.0)) throw ConfigError("experiment.families", "constant family has lambda = 0");
      if (a / u.lambda() > 0.5 * m.injectivity_radius()) {
        throw ConfigError("parameters.a", "R = a/lambda exceeds half the injectivity radius for " + u.descriptor());
      }
    }
  }
  if (c.kind == "green" || c.kind == "weyl") {
    for (const auto& u : fams) {
      if (!(u.eigenvalue_sq() > 0.0)) throw ConfigError("experiment.families", "constant family has lambda = 0");
    }
  }
  if (c.kind == "smallmass" && !(c.delta > 0.0 && c.delta <= a / 3.0)) {
    throw ConfigError("parameters.delta", "must lie in (0, a/3] with a = " + format_number(a));
  }
  if (c.kind == "sweep") {
    if (c.delta_list.size() < 2) throw ConfigError("parameters.delta_list", "needs at least two values");
    for (std::size_t i = 0; i < c.delta_list.size(); ++i) {
      const double d = c.delta_list[i];
      if (!(d > 0.0 && d <= a / 3.0)) throw ConfigError("parameters.delta_list", "values must lie in (0, a/3]");
      if (i > 0 && !(d < c.delta_list[i - 1])) throw ConfigError("parameters.delta_list", "must be strictly decreasing");
    }
  }
  if (c.kind == "largevalue") {
    if (c.gamma_list.empty()) throw ConfigError("parameters.gamma_list", "must not be empty");
    for (double g : c.gamma_list) {
      if (!(g > 0.0)) throw ConfigError("parameters.gamma_list", "values must be > 0");
    }
    in_unit("parameters.eps_mass", c.eps_mass);
    if (c.center && c.center->size() != static_cast<std::size_t>(m.kind == ManifoldKind::Circle ? 1 : 2)) {
      throw ConfigError("parameters.center", "wrong number of coordinates");
    }
  }
  if (c.kind == "hwexample") {
    if (c.k_list.empty()) throw ConfigError("parameters.k_list", "must not be empty");
    for (double k : c.k_list) {
      if (k < 1 || k != std::floor(k) || k > LegendreTable::kMaxDegree) {
        throw ConfigError("parameters.k_list", "values must be integers in [1, 512]");
      }
    }
    if (c.hw_mode == "equator") {
      if (!(c.delta > 0.0 && c.delta <= 1.0)) throw ConfigError("parameters.delta", "must lie in (0, 1] in equator mode");
      for (double k : c.k_list) {
        if (std::abs(c.theta_offset) >= 0.05 / std::sqrt(k)) {
          throw ConfigError("parameters.theta_offset", "must satisfy |offset| < k^(-1/2)/20");
        }
      }
    } else if (c.hw_mode == "pole") {
      if (!(c.r_pole > 0.0 && c.r_pole < 0.5 * kPi)) throw ConfigError("parameters.r_pole", "must lie in (0, pi/2)");
    } else {
      throw ConfigError("parameters.hw_mode", "must be equator or pole");
    }
  }
  if (c.kind == "weyl" && !(c.spacing_factor > 0.0 && c.spacing_factor <= 1.0)) {
    throw ConfigError("parameters.spacing_factor", "must lie in (0, 1]");
  }
}

}  // namespace planck

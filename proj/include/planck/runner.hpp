#pragma once

// Executes an ExperimentConfig: builds the reports, writes artifacts, and
// maps the outcome to an exit status.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "planck/analysis.hpp"
#include "planck/config.hpp"
#include "planck/report.hpp"

namespace planck {

enum ExitStatus : int { kExitOk = 0, kExitConfig = 1, kExitAssertion = 2 };

struct RunResult {
  int status = kExitOk;
  std::vector<ExperimentReport> reports;
  std::vector<std::filesystem::path> artifacts;
  std::string error;
};

/// Output directory with the PLANCK_OUTPUT_DIR override applied.
inline std::string output_dir_from_env(const std::string& fallback) {
  if (const char* env = std::getenv("PLANCK_OUTPUT_DIR"); env && *env) return env;
  return fallback;
}

inline std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (keep) {
      out += c;
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

/// Default large-value center: sampled argmax of |u|.
inline Point default_center(const EigenfunctionSpec& u) {
  const double h = std::min(0.05, 0.125 / std::max(1.0, u.lambda()));
  return sup_over_manifold(u.manifold(), h, [&](Point p) { return std::abs(u.value(p)); }).argmax;
}

inline SmallMassOptions smallmass_options(const ExperimentConfig& c) {
  SmallMassOptions o;
  o.a = c.resolved_a();
  o.eps_frac = c.eps_frac;
  o.eps_mass = c.eps_mass;
  o.seed = c.seed;
  o.fixed_threshold = c.threshold == "fixed";
  o.c2 = c.c2;
  o.nodal.tolerance_factor = c.nodal_tolerance;
  o.orders = c.orders();
  return o;
}

/// Builds all reports of a validated config.
inline std::vector<ExperimentReport> build_reports(const ExperimentConfig& c) {
  const std::vector<EigenfunctionSpec> fams = resolve_families(c);
  const Manifold m = c.resolved_manifold();
  std::vector<ExperimentReport> out;
  if (c.kind == "weyl") {
    out.push_back(weyl_monitor(fams, c.spacing_factor));
  } else if (c.kind == "hwexample") {
    HwExampleOptions o;
    o.ks.clear();
    for (double k : c.k_list) o.ks.push_back(static_cast<int>(k));
    o.mode = c.hw_mode == "pole" ? HwMode::Pole : HwMode::Equator;
    o.delta = c.delta;
    o.theta_offset = c.theta_offset;
    o.r_pole = c.r_pole;
    out.push_back(highest_weight_example(o));
  } else {
    for (const EigenfunctionSpec& u : fams) {
      if (c.kind == "green") {
        out.push_back(green_report(u));
      } else if (c.kind == "pack") {
        out.push_back(packing_report(u, c.resolved_a(), c.seed));
      } else if (c.kind == "smallmass") {
        out.push_back(smallmass_experiment(u, smallmass_options(c), c.delta));
      } else if (c.kind == "sweep") {
        out.push_back(scale_sweep(u, smallmass_options(c), c.delta_list));
      } else if (c.kind == "largevalue") {
        LargeValueOptions o;
        o.gammas = c.gamma_list;
        o.eps = c.eps_mass;
        o.assert_large_ratio = c.assert_large_ratio;
        o.orders = c.orders();
        Point p = default_center(u);
        if (c.center) {
          p = m.kind == ManifoldKind::Circle ? circle_point((*c.center)[0])
                                             : reduce(m, Point{{(*c.center)[0], (*c.center)[1]}});
        }
        out.push_back(largevalue_experiment(u, p, o));
      } else if (c.kind == "mvi") {
        out.push_back(mean_value_diagnostic(u, c.resolved_a(), c.seed, c.orders()));
      }
    }
  }
  const Json echo = to_json(c);
  for (ExperimentReport& r : out) r.config = echo;
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
}

/// Writes JSON and/or CSV artifacts for each report.
inline std::vector<std::filesystem::path> write_artifacts(const std::vector<ExperimentReport>& reports,
                                                          const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ExperimentReport& r = reports[i];
    const std::string base = r.kind + "_" + std::to_string(i) + "_" + slug(r.family);
    for (const std::string& fmt : c.formats) {
      if (fmt == "json") {
        written.push_back(dir / (base + ".json"));
        write_file(written.back(), to_json(r).dump(2) + "\n");
      } else if (fmt == "csv") {
        if (!r.balls.empty()) {
          written.push_back(dir / (base + ".csv"));
          write_file(written.back(), balls_csv(r));
        }
        if (!r.table.columns.empty()) {
          written.push_back(dir / (base + (r.balls.empty() ? ".csv" : "_table.csv")));
          write_file(written.back(), table_csv(r));
        }
      }
    }
  }
  return written;
}

inline void print_summary(std::ostream& out, const ExperimentReport& r) {
  out << r.kind << " " << r.manifold << " " << r.family;
  if (r.packing) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", r.packing->fraction());
    out << "  J=" << r.packing->J << " K=" << r.packing->K << " K/J=" << buf;
  }
  if (r.diagnostics.contains("rho_max")) out << " rho_max=" << format_number(r.diagnostics["rho_max"].get<double>());
  if (r.diagnostics.contains("residual")) out << " residual=" << format_number(r.diagnostics["residual"].get<double>());
  out << "\n";
  for (const Check& c : r.checks) {
    out << "  [" << (c.passed ? "PASS" : "FAIL") << "] " << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
  }
}

/// Validates, runs and writes artifacts. Never throws.
inline RunResult run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  RunResult result;
  try {
    validate(config);
  } catch (const ConfigError& e) {
    result.status = kExitConfig;
    result.error = e.what();
    err << "config error: " << e.what() << "\n";
    return result;
  }
  try {
    result.reports = build_reports(config);
    result.artifacts = write_artifacts(result.reports, config);
  } catch (const std::invalid_argument& e) {
    result.status = kExitConfig;
    result.error = e.what();
    err << "config error: " << e.what() << "\n";
    return result;
  } catch (const std::exception& e) {
    result.status = kExitConfig;
    result.error = e.what();
    err << "error: " << e.what() << "\n";
    return result;
  }
  bool ok = true;
  for (const ExperimentReport& r : result.reports) {
    print_summary(out, r);
    ok = ok && r.passed();
  }
  result.status = ok ? kExitOk : kExitAssertion;
  return result;
}

}  // namespace planck

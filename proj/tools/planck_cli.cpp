// planck: experiment runner for eigenfunction mass distribution at the
// Planck scale.
//
//   planck run smallmass --manifold circle --family "cos:k=20" --delta 0.3
//   planck plotdata --report out/sweep_0_zonal_l_20.json --kind rho_vs_delta
//   planck selftest
//
// PLANCK_THREADS sets the worker count, PLANCK_OUTPUT_DIR the output
// directory (flags take precedence over both).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planck/planck.hpp"

namespace {

struct FlagBinding {
  std::string section;
  std::string key;
  std::string value;
};

int cmd_run(const std::string& kind, const std::string& config_path, const std::vector<std::string>& families,
            const std::vector<FlagBinding>& flags) {
  planck::ExperimentConfig cfg;
  cfg.output_dir = planck::output_dir_from_env(cfg.output_dir);
  try {
    if (!config_path.empty()) cfg = planck::config_from_file(config_path, cfg);
    if (const char* env = std::getenv("PLANCK_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!kind.empty()) cfg.kind = kind;
    if (!families.empty()) cfg.families = families;
    for (const FlagBinding& f : flags) planck::apply_setting(cfg, f.section, f.key, f.value);
  } catch (const planck::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return planck::kExitConfig;
  }
  const planck::RunResult r = planck::run(cfg, std::cout, std::cerr);
  for (const auto& p : r.artifacts) std::cout << "wrote " << p.string() << "\n";
  return r.status;
}

int cmd_plotdata(const std::string& report_path, const std::string& kind, int bins, const std::string& out_path) {
  try {
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot read '" + report_path + "'");
    const planck::ExperimentReport report = planck::report_from_json(planck::Json::parse(in));
    const std::string csv = planck::emit_plotdata(report, planck::plot_kind_from_string(kind), bins);
    if (out_path.empty() || out_path == "-") {
      std::cout << csv;
    } else {
      planck::write_file(out_path, csv);
    }
  } catch (const std::exception& e) {
    std::cerr << "plotdata: " << e.what() << "\n";
    return planck::kExitConfig;
  }
  return planck::kExitOk;
}

int cmd_selftest(std::uint64_t seed, std::string out_dir) {
  namespace fs = std::filesystem;
  if (out_dir.empty()) out_dir = planck::output_dir_from_env("planck-out") + "/selftest";
  planck::AcceptanceOptions opt;
  opt.seed = seed;
  opt.artifact_dir = fs::path(out_dir) / "scratch";
  std::vector<planck::CriterionResult> results;
  try {
    results = planck::run_acceptance(opt, std::cout);
    fs::create_directories(out_dir);
    planck::detail::write_representative(seed, fs::path(out_dir) / "reports");
    planck::write_file(fs::path(out_dir) / "acceptance.json", planck::acceptance_json(results, seed).dump(2) + "\n");
    fs::remove_all(opt.artifact_dir);
  } catch (const std::exception& e) {
    std::cerr << "selftest: " << e.what() << "\n";
    return planck::kExitConfig;
  }
  const bool ok = planck::all_gating_passed(results);
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << "; artifacts in " << out_dir << "\n";
  return ok ? planck::kExitOk : planck::kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eigenfunction mass distribution at the Planck scale: experiment runner"};
  app.set_version_flag("--version", planck::kToolVersion);
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment (green, pack, smallmass, sweep, largevalue, hwexample, mvi, weyl)");
  std::string kind, config_path;
  std::vector<std::string> families;
  run->add_option("kind", kind, "Experiment kind");
  run->add_option("-c,--config", config_path, "INI config file; flags override its values");
  run->add_option("-f,--family", families, "Family descriptor, e.g. zonal:l=20 (repeatable)");
  // Flags that map one-to-one onto config keys.
  const std::vector<std::tuple<std::string, std::string, std::string, std::string>> keyed{
      {"--manifold", "experiment", "manifold", "circle, torus or sphere"},
      {"--seed", "experiment", "seed", "Global seed"},
      {"--a", "parameters", "a", "Packing constant, R = a / lambda"},
      {"--eps", "parameters", "eps", "Sets both eps_frac and eps_mass"},
      {"--eps-frac", "parameters", "eps_frac", "Fraction of discarded balls"},
      {"--eps-mass", "parameters", "eps_mass", "Bound on rho"},
      {"--delta", "parameters", "delta", "Ball radius r = delta / lambda"},
      {"--delta-list", "parameters", "delta_list", "Comma-separated, decreasing"},
      {"--gamma-list", "parameters", "gamma_list", "Comma-separated"},
      {"--center", "parameters", "center", "Large-value center (chart coordinates)"},
      {"--threshold", "parameters", "threshold", "quantile or fixed"},
      {"--c2", "parameters", "c2", "Constant of the fixed threshold c2 lambda^2 / eps"},
      {"--quad-radial", "parameters", "quadrature_radial", "Radial ball quadrature points"},
      {"--quad-angular", "parameters", "quadrature_angular", "Angular ball quadrature points"},
      {"--nodal-tol", "parameters", "nodal_tolerance", "Nodal tolerance factor"},
      {"--hw-mode", "parameters", "hw_mode", "equator or pole"},
      {"--k-list", "parameters", "k_list", "Highest weight degrees"},
      {"--r-pole", "parameters", "r_pole", "Cap radius in pole mode"},
      {"--theta-offset", "parameters", "theta_offset", "Equator mode colatitude offset"},
      {"--spacing-factor", "parameters", "spacing_factor", "Sup sampling spacing in units of 1/lambda"},
      {"--assert-large-ratio", "parameters", "assert_large_ratio", "true/false"},
      {"-o,--out", "output", "dir", "Output directory"},
      {"--format", "output", "formats", "json,csv"},
  };
  std::vector<std::string> values(keyed.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    options.push_back(run->add_option(std::get<0>(keyed[i]), values[i], std::get<3>(keyed[i])));
  }

  // plotdata
  auto* plot = app.add_subcommand("plotdata", "Project a JSON report onto a plot-ready CSV");
  std::string report_path, plot_kind, plot_out;
  int bins = 20;
  plot->add_option("-r,--report", report_path, "JSON report")->required();
  plot->add_option("-k,--kind", plot_kind, "rho_vs_delta, rho_histogram or ratio_vs_k")->required();
  plot->add_option("--bins", bins, "Histogram bins");
  plot->add_option("-o,--out", plot_out, "Output CSV (default: stdout)");

  // selftest
  auto* self = app.add_subcommand("selftest", "Run the acceptance suite");
  std::uint64_t self_seed = 0;
  std::string self_out;
  self->add_option("--seed", self_seed, "Seed");
  self->add_option("-o,--out", self_out, "Artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : planck::kExitConfig;
  }

  if (*run) {
    std::vector<FlagBinding> flags;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
      if (options[i]->count() > 0) flags.push_back({std::get<1>(keyed[i]), std::get<2>(keyed[i]), values[i]});
    }
    return cmd_run(kind, config_path, families, flags);
  }
  if (*plot) return cmd_plotdata(report_path, plot_kind, bins, plot_out);
  return cmd_selftest(self_seed, self_out);
}

#pragma once

// The acceptance suite: one pass/fail line per criterion. Shared by the
// `selftest` subcommand and the acceptance test binary.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "planck/analysis.hpp"
#include "planck/config.hpp"
#include "planck/runner.hpp"

namespace planck {

struct CriterionResult {
  std::string id;
  std::string title;
  bool passed = false;
  bool informational = false;  // reported, never gates
  std::string detail;
  double seconds = 0.0;        // printed, never written to artifacts
};

struct AcceptanceOptions {
  std::uint64_t seed = 0;
  std::filesystem::path artifact_dir;  // empty: no artifacts
};

/// Circle k in {10..50}, zonal and random sphere l in {10..40}, torus
/// N in {25, 100, 625} with presets full, pair, random.
inline std::vector<EigenfunctionSpec> acceptance_suite(std::uint64_t seed) {
  std::vector<EigenfunctionSpec> s;
  for (int k = 10; k <= 50; k += 10) s.push_back(EigenfunctionSpec::circle_mode(k));
  for (int l = 10; l <= 40; l += 10) s.push_back(EigenfunctionSpec::zonal(l));
  for (int l = 10; l <= 40; l += 10) s.push_back(EigenfunctionSpec::random_sphere(l, seed));
  for (long N : {25L, 100L, 625L}) {
    for (TorusPreset p : {TorusPreset::Full, TorusPreset::Pair, TorusPreset::Random}) {
      s.push_back(EigenfunctionSpec::torus_mode(N, p, seed));
    }
  }
  return s;
}

/// Nodal coverage constant as stated for the criterion: 5 on circle and
/// torus, 8 on the sphere.
inline double criterion_a(Manifold m) { return m.kind == ManifoldKind::Sphere2 ? 8.0 : 5.0; }

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

struct Coverage {
  std::size_t balls = 0;
  std::size_t found = 0;
  std::vector<std::string> failures;
};

inline Coverage nodal_coverage(const std::vector<EigenfunctionSpec>& suite, double (*a_of)(Manifold),
                               std::uint64_t seed) {
  Coverage c;
  for (const EigenfunctionSpec& u : suite) {
    const Packing p = maximal_disjoint_packing(u.manifold(), a_of(u.manifold()) / u.lambda(), seed);
    std::vector<char> ok(p.size(), 0);
    parallel_for(p.size(), [&](std::size_t j) {
      ok[j] = find_nodal_point(u, p.centers[j], p.radius / 3.0).found() ? 1 : 0;
    });
    std::size_t hit = 0;
    for (char x : ok) hit += x;
    c.balls += p.size();
    c.found += hit;
    if (hit < p.size()) c.failures.push_back(u.descriptor() + " " + std::to_string(p.size() - hit) + "/" + std::to_string(p.size()));
  }
  return c;
}

inline std::string join_strings(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "; " : "") + v[i];
  return s;
}

/// Fixed representative run set used for the reproducibility criterion and
/// as selftest artifacts.
inline std::vector<ExperimentConfig> representative_configs(std::uint64_t seed, const std::string& dir) {
  std::vector<ExperimentConfig> out;
  auto add = [&](std::string kind, std::string manifold, std::vector<std::string> fams) {
    ExperimentConfig c;
    c.kind = std::move(kind);
    c.manifold = std::move(manifold);
    c.families = std::move(fams);
    c.seed = seed;
    c.output_dir = dir;
    out.push_back(c);
    return &out.back();
  };
  add("green", "sphere", {"zonal:l=20", "sphrand:l=20,seed=" + std::to_string(seed)});
  add("pack", "torus", {"torus:N=100,preset=random,seed=" + std::to_string(seed)});
  add("smallmass", "circle", {"cos:k=20"})->delta = 0.2;
  add("sweep", "sphere", {"sphrand:l=20,seed=" + std::to_string(seed)});
  add("largevalue", "sphere", {"zonal:l=20"})->center = std::vector<double>{0.0, 0.0};
  add("hwexample", "sphere", {});
  add("mvi", "circle", {"cos:k=20"});
  add("weyl", "sphere", {"zonal:l=10", "zonal:l=20"});
  return out;
}

inline std::vector<std::filesystem::path> write_representative(std::uint64_t seed, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const ExperimentConfig& c : representative_configs(seed, dir.string())) {
    validate(c);
    const auto written = write_artifacts(build_reports(c), c);
    files.insert(files.end(), written.begin(), written.end());
  }
  return files;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log) {
  using detail::fmt;
  std::vector<CriterionResult> results;
  const std::vector<EigenfunctionSpec> suite = acceptance_suite(opt.seed);
  auto emit = [&](CriterionResult r) {
    log << (r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL")) << "  " << r.id << "  " << r.title
        << " | " << r.detail << " (" << fmt(r.seconds, 3) << " s)\n";
    log.flush();
    results.push_back(std::move(r));
  };

  // 1. Green identity and the L1 gradient bound.
  {
    detail::Stopwatch sw;
    bool ok = true;
    double worst_circle = 0.0, worst_other = 0.0, slowest = 0.0;
    std::vector<std::string> bad;
    for (const EigenfunctionSpec& u : suite) {
      detail::Stopwatch one;
      const GreenResult g = green_identity(u);
      const double t = one.seconds();
      slowest = std::max(slowest, t);
      const bool circle = u.manifold().kind == ManifoldKind::Circle;
      (circle ? worst_circle : worst_other) = std::max(circle ? worst_circle : worst_other, g.residual);
      const bool pass = g.residual <= green_tolerance(u) && g.fact_b_holds && t < 10.0;
      if (!pass) bad.push_back(u.descriptor());
      ok = ok && pass;
    }
    emit({"C1", "Green identity residual and L1 gradient bound", ok,
          false,
          "max residual circle " + fmt(worst_circle) + " (<=1e-12), sphere/torus " + fmt(worst_other) +
              " (<=1e-6); slowest family under 10 s: " + (slowest < 10.0 ? "yes" : "no") +
              (bad.empty() ? "" : "; failing: " + detail::join_strings(bad)),
          sw.seconds()});
  }

  // 2. Nodal coverage with a = 5 (circle, torus) and a = 8 (sphere).
  {
    detail::Stopwatch sw;
    const detail::Coverage c = detail::nodal_coverage(suite, &criterion_a, opt.seed);
    const double t = sw.seconds();
    emit({"C2", "Nodal point in every packed ball (a=5 circle/torus, a=8 sphere)",
          c.found == c.balls && t < 120.0, false,
          std::to_string(c.found) + "/" + std::to_string(c.balls) + " balls" +
              (c.failures.empty() ? "" : "; misses: " + detail::join_strings(c.failures)),
          t});
    detail::Stopwatch sw2;
    const detail::Coverage d = detail::nodal_coverage(suite, &default_a, opt.seed);
    emit({"C2+", "Nodal coverage at library defaults (torus a=7.5)", d.found == d.balls, true,
          std::to_string(d.found) + "/" + std::to_string(d.balls) + " balls" +
              (d.failures.empty() ? "" : "; misses: " + detail::join_strings(d.failures)),
          sw2.seconds()});
  }

  // 3. Packing separation, covering and volume bounds.
  {
    detail::Stopwatch sw;
    bool ok = true;
    std::vector<std::string> bad;
    std::size_t packings = 0;
    for (const EigenfunctionSpec& u : suite) {
      for (double a : {criterion_a(u.manifold()), default_a(u.manifold())}) {
        const ExperimentReport r = packing_report(u, a, opt.seed, 10000);
        ++packings;
        if (!r.passed()) {
          ok = false;
          bad.push_back(u.descriptor() + " a=" + fmt(a));
        }
      }
    }
    emit({"C3", "Packings: separation >= 2R, 10^4-probe 2R-covering, J Vol(B) <= Vol(M)", ok, false,
          std::to_string(packings) + " packings checked" + (bad.empty() ? "" : "; failing: " + detail::join_strings(bad)),
          sw.seconds()});
  }

  // 4 and 5. Small mass at delta = min(0.3 a / 3, eps / sqrt(C2_emp)); scale sweep.
  {
    detail::Stopwatch sw4;
    double sweep_seconds = 0.0;
    bool ok4 = true, ok5 = true;
    double worst_frac_kj = 1.0, worst_rho_frac = 1.0, worst_circle = 0.0;
    double slope_lo = INFINITY, slope_hi = -INFINITY, rho_small = 0.0;
    std::vector<std::string> bad4, bad5;
    const double eps = 0.1;
    const std::vector<double> deltas{0.4, 0.2, 0.1, 0.05};
    for (const EigenfunctionSpec& u : suite) {
      SmallMassOptions o;
      o.a = default_a(u.manifold());
      o.eps_frac = o.eps_mass = eps;
      o.seed = opt.seed;
      const SmallMassStage s = prepare_smallmass(u, o);
      const double delta = std::min(0.3 * o.a / 3.0, eps / std::sqrt(s.c2_emp()));
      const SmallMassEvaluation e = evaluate_smallmass(s, delta);
      const double kj = static_cast<double>(s.K) / static_cast<double>(s.packing.size());
      const double frac = e.evaluated ? static_cast<double>(e.rho_le_eps) / static_cast<double>(e.evaluated) : 0.0;
      bool pass = kj >= 0.9 && frac >= 0.99 && e.evaluated > 0;
      if (u.manifold().kind == ManifoldKind::Circle) {
        const double closed = 1.0 - std::sin(2.0 * delta) / (2.0 * delta);
        for (std::size_t j = 0; j < e.mass.size(); ++j) {
          if (!e.mass[j]) continue;
          const double err = std::abs(e.mass[j]->ratio - closed);
          worst_circle = std::max(worst_circle, err);
          pass = pass && err <= 1e-6;
        }
      }
      worst_frac_kj = std::min(worst_frac_kj, kj);
      worst_rho_frac = std::min(worst_rho_frac, frac);
      if (!pass) bad4.push_back(u.descriptor());
      ok4 = ok4 && pass;

      detail::Stopwatch sw5;
      std::vector<double> rho_max;
      for (double d : deltas) rho_max.push_back(evaluate_smallmass(s, d).rho_max);
      const double slope = loglog_slope(deltas, rho_max);
      slope_lo = std::min(slope_lo, slope);
      slope_hi = std::max(slope_hi, slope);
      rho_small = std::max(rho_small, rho_max.back());
      const bool pass5 = std::abs(slope - 2.0) <= 0.3 && rho_max.back() < 0.01;
      if (!pass5) bad5.push_back(u.descriptor());
      ok5 = ok5 && pass5;
      sweep_seconds += sw5.seconds();
    }
    emit({"C4", "Small mass: K/J >= 0.9 and rho <= 0.1 on >= 99% of selected balls; circle closed form", ok4,
          false,
          "min K/J " + fmt(worst_frac_kj) + ", min fraction rho<=eps " + fmt(worst_rho_frac) +
              ", circle max |rho - closed form| " + fmt(worst_circle, 3) +
              (bad4.empty() ? "" : "; failing: " + detail::join_strings(bad4)),
          sw4.seconds() - sweep_seconds});
    emit({"C5", "Scale sweep: log-log slope 2 +- 0.3 and rho_max(0.05) < 0.01", ok5, false,
          "slopes in [" + fmt(slope_lo) + ", " + fmt(slope_hi) + "], max rho_max(0.05) " + fmt(rho_small) +
              (bad5.empty() ? "" : "; failing: " + detail::join_strings(bad5)),
          sweep_seconds});
  }

  // 6. Zonal harmonics at the pole.
  {
    detail::Stopwatch sw;
    std::vector<double> gammas;
    for (int i = 1; i <= 40; ++i) gammas.push_back(0.05 * i);
    bool ok = true;
    std::vector<double> admissible;
    std::string info;
    for (int l : {20, 50}) {
      const EigenfunctionSpec u = EigenfunctionSpec::zonal(l);
      LargeValueOptions o;
      o.gammas = gammas;
      const ExperimentReport r = largevalue_experiment(u, sphere_point(0.0, 0.0), o);
      const double M = r.diagnostics["M"].get<double>();
      const double M_exact = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
      ok = ok && std::abs(M - M_exact) <= 1e-12 * M_exact;
      if (r.diagnostics["admissible_gamma"].is_null()) {
        ok = false;
        info += "l=" + std::to_string(l) + ": no admissible gamma; ";
        continue;
      }
      const double g = r.diagnostics["admissible_gamma"].get<double>();
      admissible.push_back(g);
      const std::size_t cg = *r.table.column("gamma"), cr = *r.table.column("ratio"), cc = *r.table.column("c_mv");
      for (const auto& row : r.table.rows) {
        if (row[cg].get<double>() != g) continue;
        const double ratio = row[cr].get<double>(), c_mv = row[cc].get<double>();
        const bool pass = ratio >= 0.5 * M * M * c_mv && ratio >= g * M * M;
        ok = ok && pass;
        info += "l=" + std::to_string(l) + ": gamma*=" + fmt(g) + " ratio=" + fmt(ratio) + " gammaM^2=" + fmt(g * M * M) +
                " 0.5M^2c_mv=" + fmt(0.5 * M * M * c_mv) + "; ";
      }
    }
    if (admissible.size() == 2) {
      const double rel = std::abs(admissible[1] - admissible[0]) / admissible[0];
      ok = ok && rel <= 0.25;
      info += "gamma* relative change " + fmt(rel);
    }
    emit({"C6", "Zonal l=20,50 at the pole: ratio >= gamma M^2 and >= 0.5 M^2 c_mv; stable gamma*", ok, false, info,
          sw.seconds()});
  }

  // 7. Highest weight harmonics at an equatorial maximum, r = gamma M / lambda.
  {
    detail::Stopwatch sw;
    const std::vector<double> gammas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
    const double eps = 0.1;
    double best_gamma = gammas.front(), best_min = -1.0;
    std::vector<std::vector<double>> ratios(gammas.size());
    bool sup_bound_ok = true;
    for (int k : {16, 36, 64}) {
      const EigenfunctionSpec u = EigenfunctionSpec::highest_weight(k);
      LargeValueOptions o;
      o.gammas = gammas;
      o.eps = eps;
      const ExperimentReport r = largevalue_experiment(u, sphere_point(0.5 * kPi, kPi / (2.0 * k)), o);
      const std::size_t cl = *r.table.column("ratio_large");
      for (std::size_t i = 0; i < gammas.size(); ++i) {
        const Json& cell = r.table.rows[i][cl];
        const double v = cell.is_number() ? cell.get<double>() : 0.0;
        ratios[i].push_back(v);
        sup_bound_ok = sup_bound_ok && v <= std::sqrt(static_cast<double>(k)) * (1.0 + 1e-9);
      }
    }
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      const double mn = *std::min_element(ratios[i].begin(), ratios[i].end());
      if (mn > best_min) {
        best_min = mn;
        best_gamma = gammas[i];
      }
    }
    std::string detail = "calibrated gamma=" + fmt(best_gamma) + " gives ratios";
    std::size_t bi = static_cast<std::size_t>(std::find(gammas.begin(), gammas.end(), best_gamma) - gammas.begin());
    for (double v : ratios[bi]) detail += " " + fmt(v);
    detail += " vs 1/eps=" + fmt(1.0 / eps) + "; every ratio <= sup u^2 = sqrt(k): " + (sup_bound_ok ? "yes" : "no");
    emit({"C7", "Highest weight k=16,36,64: ratio at r = gamma M / lambda exceeds 1/eps for a common gamma",
          best_min > 1.0 / eps, false, detail, sw.seconds()});
  }

  // 8. Highest weight example: equator band and pole bound.
  {
    detail::Stopwatch sw;
    HwExampleOptions eq;
    const ExperimentReport re = highest_weight_example(eq);
    HwExampleOptions pole;
    pole.mode = HwMode::Pole;
    const ExperimentReport rp = highest_weight_example(pole);
    std::string d = "equator band factor " + fmt(re.diagnostics["band_factor"].get<double>());
    const std::size_t cr = *rp.table.column("ratio");
    d += "; pole ratios";
    for (const auto& row : rp.table.rows) d += " " + fmt(row[cr].get<double>(), 3);
    emit({"C8", "Highest weight: ratio/sqrt(k) band <= 2 at the equator; pole ratio <= C k^-1/2 (cos r)^(k+2)/r^2",
          re.passed() && rp.passed(), false, d, sw.seconds()});
  }

  // 9. Analytic gradients against central differences.
  {
    detail::Stopwatch sw;
    std::vector<EigenfunctionSpec> fams = suite;
    for (int k : {16, 36, 64}) fams.push_back(EigenfunctionSpec::highest_weight(k));
    double worst = 0.0;
    for (const EigenfunctionSpec& u : fams) worst = std::max(worst, gradient_fd_check(u, 100, opt.seed + 1).max_relative_error);
    emit({"C9", "Gradients match central differences at 100 random points per family", worst < 1e-6, false,
          "max relative error " + fmt(worst, 3) + " over " + std::to_string(fams.size()) + " families", sw.seconds()});
  }

  // 10. Byte-identical artifacts across two runs.
  {
    detail::Stopwatch sw;
    namespace fs = std::filesystem;
    const fs::path base = opt.artifact_dir.empty() ? fs::temp_directory_path() / "planck-acceptance" : opt.artifact_dir;
    // Same command into the same directory twice; the first run is kept in memory.
    const fs::path dir = base / "repro";
    fs::remove_all(dir);
    const auto fa = detail::write_representative(opt.seed, dir);
    std::vector<std::string> first;
    for (const auto& f : fa) first.push_back(detail::slurp(f));
    fs::remove_all(dir);
    const auto fb = detail::write_representative(opt.seed, dir);
    bool same = fa.size() == fb.size() && !fa.empty();
    std::size_t differing = 0;
    for (std::size_t i = 0; same && i < fa.size(); ++i) {
      if (fa[i] != fb[i] || first[i] != detail::slurp(fb[i])) ++differing;
    }
    same = same && differing == 0;
    if (opt.artifact_dir.empty()) fs::remove_all(base);
    emit({"C10", "Reproducibility: two runs with the same seed give byte-identical artifacts", same, false,
          std::to_string(fa.size()) + " files compared, " + std::to_string(differing) + " differ", sw.seconds()});
  }
  return results;
}

/// Summary JSON without timings.
inline Json acceptance_json(const std::vector<CriterionResult>& results, std::uint64_t seed) {
  Json j;
  j["tool_version"] = kToolVersion;
  j["seed"] = seed;
  Json items = Json::array();
  bool all = true;
  for (const CriterionResult& r : results) {
    items.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"informational", r.informational},
                     {"detail", r.detail}});
    if (!r.informational) all = all && r.passed;
  }
  j["criteria"] = std::move(items);
  j["all_passed"] = all;
  return j;
}

inline bool all_gating_passed(const std::vector<CriterionResult>& results) {
  for (const CriterionResult& r : results) {
    if (!r.informational && !r.passed) return false;
  }
  return true;
}

}  // namespace planck

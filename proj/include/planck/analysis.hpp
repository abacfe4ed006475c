#pragma once

// Verification pipelines: local mass ratios, the Green identity, small-mass
// statistics over Planck-ball packings, large-value concentration, the
// highest weight example, mean value constants and sup-norm growth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "planck/eigenfunction.hpp"
#include "planck/manifold.hpp"
#include "planck/packing.hpp"
#include "planck/parallel.hpp"
#include "planck/quadrature.hpp"
#include "planck/random.hpp"
#include "planck/report.hpp"

namespace planck {

enum class MassClass { CaseISmall, CaseIILarge, Neutral };

inline std::string to_string(MassClass c) {
  switch (c) {
    case MassClass::CaseISmall: return "CaseI_small";
    case MassClass::CaseIILarge: return "CaseII_large";
    case MassClass::Neutral: return "Neutral";
  }
  return "Neutral";
}

struct MassRecord {
  Point center;
  double radius = 0.0;
  double local_mass = 0.0;  // int_B |u|^2
  double ratio = 0.0;       // Vol(M) * local_mass / Vol(B)
  double ball_volume = 0.0;
  MassClass classification = MassClass::Neutral;

  /// local_mass / Vol(B).
  double unnormalized_ratio() const { return local_mass / ball_volume; }
};

/// Ball quadrature orders used for u: the angular count resolves |u|^2
/// exactly on circles around any center of the sphere.
inline QuadratureOrders default_ball_orders(const EigenfunctionSpec& u) {
  QuadratureOrders o;
  if (u.manifold().kind == ManifoldKind::Sphere2) o.angular = std::max(o.angular, 2 * u.max_frequency() + 2);
  return o;
}

inline double ball_mass(const EigenfunctionSpec& u, Point p, double r,
                        std::optional<QuadratureOrders> orders = {}) {
  const QuadratureRule rule = ball_rule(u.manifold(), p, r, orders.value_or(default_ball_orders(u)));
  return rule.integrate([&](Point x) {
    const double v = u.value(x);
    return v * v;
  });
}

inline double ball_gradient_energy(const EigenfunctionSpec& u, Point p, double r,
                                   std::optional<QuadratureOrders> orders = {}) {
  const QuadratureRule rule = ball_rule(u.manifold(), p, r, orders.value_or(default_ball_orders(u)));
  return rule.integrate([&](Point x) { return u.value_gradient(x).gradient.norm_sq(); });
}

inline MassRecord local_mass_ratio(const EigenfunctionSpec& u, Point p, double r, double eps = 0.1,
                                   std::optional<QuadratureOrders> orders = {}) {
  const Manifold m = u.manifold();
  MassRecord rec;
  rec.center = reduce(m, p);
  rec.radius = r;
  rec.local_mass = ball_mass(u, rec.center, r, orders);
  rec.ball_volume = ball_volume(m, r);
  rec.ratio = rec.local_mass * m.total_volume() / rec.ball_volume;
  if (rec.ratio <= eps) {
    rec.classification = MassClass::CaseISmall;
  } else if (rec.ratio >= 1.0 / eps) {
    rec.classification = MassClass::CaseIILarge;
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Green identity

struct GreenResult {
  double residual = 0.0;       // |int|grad u|^2 - lambda^2 int u^2| / (lambda^2 int u^2)
  NormIntegrals integrals;
  double fact_b_bound = 0.0;   // Vol(M)^{1/2} lambda ||u||
  bool fact_b_holds = false;   // int |grad u| <= fact_b_bound
  int order = 0;
};

inline void require_nonconstant(const EigenfunctionSpec& u) {
  if (!(u.eigenvalue_sq() > 0.0)) throw std::invalid_argument("eigenvalue lambda^2 must be > 0");
}

inline GreenResult green_identity(const EigenfunctionSpec& u, int order = 0) {
  require_nonconstant(u);
  GreenResult g;
  g.order = order > 0 ? order : global_order(u);
  g.integrals = global_integrals(u, g.order);
  const double lam2 = u.eigenvalue_sq();
  const double mass = g.integrals.mass;
  g.residual = std::abs(g.integrals.gradient_sq - lam2 * mass) / (lam2 * mass);
  g.fact_b_bound = std::sqrt(u.manifold().total_volume() * mass) * u.lambda();
  g.fact_b_holds = g.integrals.gradient_abs <= g.fact_b_bound;
  return g;
}

inline double green_identity_residual(const EigenfunctionSpec& u) { return green_identity(u).residual; }

/// Residual tolerance: exact trigonometric identity on the circle.
inline double green_tolerance(const EigenfunctionSpec& u) {
  return u.manifold().kind == ManifoldKind::Circle ? 1e-12 : 1e-6;
}

namespace detail {

inline ExperimentReport new_report(std::string kind, const EigenfunctionSpec& u) {
  ExperimentReport r;
  r.kind = std::move(kind);
  r.manifold = std::string(to_string(u.manifold().kind));
  r.family = u.descriptor();
  r.eigenvalue_sq = u.eigenvalue_sq();
  return r;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

inline ExperimentReport green_report(const EigenfunctionSpec& u, int order = 0) {
  const GreenResult g = green_identity(u, order);
  ExperimentReport r = detail::new_report("green", u);
  r.parameters["quadrature_order"] = g.order;
  r.diagnostics["mass"] = g.integrals.mass;
  r.diagnostics["gradient_sq"] = g.integrals.gradient_sq;
  r.diagnostics["gradient_abs"] = g.integrals.gradient_abs;
  r.diagnostics["residual"] = g.residual;
  r.diagnostics["fact_b_bound"] = g.fact_b_bound;
  const double tol = green_tolerance(u);
  r.check("green_residual", g.residual <= tol,
          "residual " + format_number(g.residual) + " <= " + format_number(tol));
  r.check("fact_b", g.fact_b_holds,
          format_number(g.integrals.gradient_abs) + " <= " + format_number(g.fact_b_bound));
  return r;
}

// ---------------------------------------------------------------------------
// Small local mass on most Planck balls

struct SmallMassOptions {
  double a = 5.0;
  double eps_frac = 0.1;   // fraction of balls allowed to be discarded
  double eps_mass = 0.1;   // bound on rho
  std::uint64_t seed = 0;
  bool fixed_threshold = false;  // threshold c2 * lambda^2 / eps_frac instead of the quantile
  double c2 = 1.0;
  NodalOptions nodal;
  std::optional<QuadratureOrders> orders;
};

/// Default a per manifold: circle 5, torus 7.5, sphere 8.
inline double default_a(Manifold m) {
  switch (m.kind) {
    case ManifoldKind::Circle: return 5.0;
    case ManifoldKind::Torus2: return 7.5;
    case ManifoldKind::Sphere2: return 8.0;
  }
  return 5.0;
}

/// Packing, gradient sups, selection and nodal points; independent of delta.
struct SmallMassStage {
  EigenfunctionSpec u;
  SmallMassOptions options;
  Packing packing;
  std::vector<double> g;  // sup over B(p_j, 2R/3) of |grad u|^2
  std::vector<char> selected;
  std::size_t K = 0;
  double threshold = 0.0;
  std::vector<NodalRecord> nodal;

  double R() const { return packing.radius; }
  /// Threshold constant in rho units: rho <= (c2_emp / eps_mass) delta^2.
  double c2_emp() const {
    return options.eps_mass * u.manifold().total_volume() * threshold / u.eigenvalue_sq();
  }
  /// Threshold constant in the units of the unnormalized inequality.
  double c2_unnormalized() const { return options.eps_mass * threshold / u.eigenvalue_sq(); }
  std::size_t required_K() const {
    const double need = (1.0 - options.eps_frac) * static_cast<double>(packing.size());
    return static_cast<std::size_t>(std::ceil(need - 1e-12));
  }
};

inline void validate_smallmass(const EigenfunctionSpec& u, const SmallMassOptions& opt) {
  require_nonconstant(u);
  if (!(opt.a > 0.0)) throw std::invalid_argument("a must be > 0");
  if (!(opt.eps_frac > 0.0 && opt.eps_frac < 1.0)) throw std::invalid_argument("eps_frac must lie in (0, 1)");
  if (!(opt.eps_mass > 0.0 && opt.eps_mass < 1.0)) throw std::invalid_argument("eps_mass must lie in (0, 1)");
  if (opt.a / u.lambda() > 0.5 * u.manifold().injectivity_radius()) {
    throw std::invalid_argument("R = a / lambda exceeds half the injectivity radius");
  }
  if (opt.fixed_threshold && !(opt.c2 > 0.0)) throw std::invalid_argument("c2 must be > 0");
}

inline void validate_delta(const SmallMassOptions& opt, double delta) {
  if (!(delta > 0.0) || delta > opt.a / 3.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("delta must lie in (0, a/3]");
  }
}

inline SmallMassStage prepare_smallmass(const EigenfunctionSpec& u, const SmallMassOptions& opt) {
  validate_smallmass(u, opt);
  SmallMassStage s{u, opt, maximal_disjoint_packing(u.manifold(), opt.a / u.lambda(), opt.seed), {}, {}, 0, 0.0, {}};
  const std::size_t J = s.packing.size();
  const double R = s.R();
  s.g.assign(J, 0.0);
  s.nodal.assign(J, NodalRecord{});
  parallel_for(J, [&](std::size_t j) {
    const Point p = s.packing.centers[j];
    const double sup = sup_on_ball(SupTarget::GradientNorm, u, p, 2.0 * R / 3.0);
    s.g[j] = sup * sup;
    s.nodal[j] = find_nodal_point(u, p, R / 3.0, opt.nodal);
    s.nodal[j].ball_index = j;
  });
  if (opt.fixed_threshold) {
    s.threshold = opt.c2 * u.eigenvalue_sq() / opt.eps_frac;
  } else {
    std::vector<double> sorted = s.g;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t need = std::max<std::size_t>(1, s.required_K());
    s.threshold = sorted[need - 1];
  }
  s.selected.assign(J, 0);
  for (std::size_t j = 0; j < J; ++j) {
    // Sampled sups carry ~1e-9 relative noise; equal values must tie.
    if (s.g[j] <= s.threshold * (1.0 + 1e-6)) {
      s.selected[j] = 1;
      ++s.K;
    }
  }
  return s;
}

struct SmallMassEvaluation {
  double delta = 0.0;
  double r = 0.0;
  std::vector<std::optional<MassRecord>> mass;  // per ball, at the nodal point
  double rho_max = 0.0;                         // over selected balls with a nodal point
  std::size_t evaluated = 0;                    // selected balls with a nodal point
  std::size_t rho_le_eps = 0;
  std::size_t chain_violations = 0;             // rho > (c2_emp / eps) delta^2
  double chain_bound = 0.0;
};

inline SmallMassEvaluation evaluate_smallmass(const SmallMassStage& s, double delta) {
  validate_delta(s.options, delta);
  SmallMassEvaluation e;
  e.delta = delta;
  e.r = delta / s.u.lambda();
  e.chain_bound = s.c2_emp() / s.options.eps_mass * delta * delta;
  const std::size_t J = s.packing.size();
  e.mass.assign(J, std::nullopt);
  parallel_for(J, [&](std::size_t j) {
    if (s.nodal[j].q) e.mass[j] = local_mass_ratio(s.u, *s.nodal[j].q, e.r, s.options.eps_mass, s.options.orders);
  });
  for (std::size_t j = 0; j < J; ++j) {
    if (!s.selected[j] || !e.mass[j]) continue;
    const double rho = e.mass[j]->ratio;
    ++e.evaluated;
    e.rho_max = std::max(e.rho_max, rho);
    if (rho <= s.options.eps_mass) ++e.rho_le_eps;
    if (rho > e.chain_bound * (1.0 + 1e-9)) ++e.chain_violations;
  }
  return e;
}

namespace detail {

inline void stage_summary(ExperimentReport& r, const SmallMassStage& s) {
  const SmallMassOptions& o = s.options;
  r.parameters["a"] = o.a;
  r.parameters["R"] = s.R();
  r.parameters["eps_frac"] = o.eps_frac;
  r.parameters["eps_mass"] = o.eps_mass;
  r.parameters["seed"] = o.seed;
  r.parameters["threshold_mode"] = o.fixed_threshold ? "fixed" : "quantile";
  if (o.fixed_threshold) r.parameters["c2"] = o.c2;
  const QuadratureOrders q = o.orders.value_or(default_ball_orders(s.u));
  r.parameters["quadrature_radial"] = q.radial;
  r.parameters["quadrature_angular"] = q.angular;
  r.parameters["nodal_tolerance_factor"] = o.nodal.tolerance_factor;
  r.packing = PackingSummary{s.packing.size(), s.K};

  std::size_t found = 0, certified = 0, sweeps = 0;
  for (const NodalRecord& n : s.nodal) {
    if (n.found()) ++found;
    if (n.positivity_certified) ++certified;
    if (n.used_full_sweep) ++sweeps;
  }
  const GreenResult green = green_identity(s.u);
  r.diagnostics["green_residual"] = green.residual;
  r.diagnostics["g_min"] = s.g.empty() ? 0.0 : *std::min_element(s.g.begin(), s.g.end());
  r.diagnostics["g_median"] = median(s.g);
  r.diagnostics["g_max"] = s.g.empty() ? 0.0 : *std::max_element(s.g.begin(), s.g.end());
  r.diagnostics["threshold"] = s.threshold;
  r.diagnostics["threshold_over_lambda_sq"] = s.threshold / s.u.eigenvalue_sq();
  r.diagnostics["c2_emp"] = s.c2_emp();
  r.diagnostics["c2_unnormalized"] = s.c2_unnormalized();
  r.diagnostics["greedy_centers"] = s.packing.greedy_count;
  r.diagnostics["nodal_found"] = found;
  r.diagnostics["nodal_missing"] = s.nodal.size() - found;
  r.diagnostics["nodal_positivity_certified"] = certified;
  r.diagnostics["nodal_full_sweeps"] = sweeps;
  r.diagnostics["norm_sq"] = s.u.norm_sq();

  if (!o.fixed_threshold) {
    r.check("selected_fraction", s.K >= s.required_K(),
            "K=" + std::to_string(s.K) + " >= ceil((1-eps)J)=" + std::to_string(s.required_K()));
  }
}

}  // namespace detail

inline ExperimentReport smallmass_report(const SmallMassStage& s, double delta) {
  const SmallMassEvaluation e = evaluate_smallmass(s, delta);
  ExperimentReport r = detail::new_report("smallmass", s.u);
  detail::stage_summary(r, s);
  r.parameters["delta"] = delta;
  r.parameters["r"] = e.r;
  for (std::size_t j = 0; j < s.packing.size(); ++j) {
    BallRow b;
    b.ball_index = j;
    b.center = s.packing.centers[j];
    b.R = s.R();
    b.r = e.r;
    b.g = s.g[j];
    b.selected = s.selected[j] != 0;
    b.nodal_found = s.nodal[j].found();
    b.q = s.nodal[j].q;
    b.nodal_residual = s.nodal[j].residual;
    if (e.mass[j]) {
      b.local_mass = e.mass[j]->local_mass;
      b.rho = e.mass[j]->ratio;
      b.classification = to_string(e.mass[j]->classification);
    }
    r.balls.push_back(std::move(b));
  }
  const double frac = e.evaluated ? static_cast<double>(e.rho_le_eps) / static_cast<double>(e.evaluated) : 0.0;
  r.diagnostics["rho_max"] = e.rho_max;
  r.diagnostics["selected_with_nodal_point"] = e.evaluated;
  r.diagnostics["fraction_rho_le_eps"] = frac;
  r.diagnostics["chain_bound"] = e.chain_bound;
  r.diagnostics["unnormalized_max"] = e.rho_max / s.u.manifold().total_volume();
  r.diagnostics["unnormalized_bound"] = s.options.eps_mass;
  r.check("mean_value_chain", e.chain_violations == 0,
          std::to_string(e.chain_violations) + " balls exceed (c2_emp/eps) delta^2 = " + format_number(e.chain_bound));
  r.check("rho_le_eps_fraction", e.evaluated > 0 && frac >= 0.99,
          std::to_string(e.rho_le_eps) + " of " + std::to_string(e.evaluated) + " selected balls");
  return r;
}

inline ExperimentReport smallmass_experiment(const EigenfunctionSpec& u, const SmallMassOptions& opt,
                                             double delta) {
  validate_smallmass(u, opt);
  validate_delta(opt, delta);
  return smallmass_report(prepare_smallmass(u, opt), delta);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return NAN;
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

inline ExperimentReport scale_sweep(const EigenfunctionSpec& u, const SmallMassOptions& opt,
                                   const std::vector<double>& deltas) {
  validate_smallmass(u, opt);
  if (deltas.size() < 2) throw std::invalid_argument("delta_list needs at least two values");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    validate_delta(opt, deltas[i]);
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw std::invalid_argument("delta_list must be strictly decreasing");
  }
  const SmallMassStage s = prepare_smallmass(u, opt);
  ExperimentReport r = detail::new_report("sweep", u);
  detail::stage_summary(r, s);
  r.parameters["delta_list"] = deltas;
  r.table.columns = {"delta", "r", "rho_max", "chain_bound", "evaluated", "fraction_rho_le_eps"};
  std::vector<double> rho_max;
  std::size_t violations = 0;
  for (double d : deltas) {
    const SmallMassEvaluation e = evaluate_smallmass(s, d);
    rho_max.push_back(e.rho_max);
    violations += e.chain_violations;
    const double frac = e.evaluated ? static_cast<double>(e.rho_le_eps) / static_cast<double>(e.evaluated) : 0.0;
    r.table.add({d, e.r, e.rho_max, e.chain_bound, e.evaluated, frac});
  }
  const double slope = loglog_slope(deltas, rho_max);
  r.diagnostics["slope"] = detail::number(slope);
  bool monotone = true;
  for (std::size_t i = 1; i < rho_max.size(); ++i) monotone = monotone && rho_max[i] <= rho_max[i - 1];
  r.check("slope_near_2", std::abs(slope - 2.0) <= 0.3, "slope " + format_number(slope));
  r.check("rho_max_monotone", monotone);
  r.check("smallest_delta_rho_le_eps", rho_max.back() < opt.eps_mass,
          format_number(rho_max.back()) + " < " + format_number(opt.eps_mass));
  r.check("mean_value_chain", violations == 0);
  return r;
}

// ---------------------------------------------------------------------------
// Packing bounds

/// Packing at R = a / lambda with separation, probe covering and volume checks.
inline ExperimentReport packing_report(const EigenfunctionSpec& u, double a, std::uint64_t seed,
                                       std::size_t probes = 10000) {
  require_nonconstant(u);
  const Manifold m = u.manifold();
  if (!(a > 0.0) || a / u.lambda() > 0.5 * m.injectivity_radius()) {
    throw std::invalid_argument("a must be > 0 with a / lambda <= injectivity radius / 2");
  }
  const Packing packing = maximal_disjoint_packing(m, a / u.lambda(), seed);
  const double R = packing.radius;
  ExperimentReport r = detail::new_report("pack", u);
  r.parameters["a"] = a;
  r.parameters["R"] = R;
  r.parameters["seed"] = seed;
  r.parameters["probes"] = probes;
  r.packing = PackingSummary{packing.size(), packing.size()};
  for (std::size_t j = 0; j < packing.size(); ++j) {
    BallRow b;
    b.ball_index = j;
    b.center = packing.centers[j];
    b.R = R;
    r.balls.push_back(std::move(b));
  }
  const CounterRng rng(seed, 0x70726f62);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < probes; ++i) pts.push_back(random_point(m, rng, i));
  std::size_t uncovered = 0;
  for (const Point& p : pts) {
    bool hit = false;
    for (const Point& c : packing.centers) {
      if (geodesic_distance(m, p, c) <= 2.0 * R) {
        hit = true;
        break;
      }
    }
    if (!hit) ++uncovered;
  }
  const double sep = packing.size() > 1 ? min_separation(packing) : INFINITY;
  const double filled = static_cast<double>(packing.size()) * ball_volume(m, R);
  r.diagnostics["min_separation"] = detail::number(sep);
  r.diagnostics["greedy_centers"] = packing.greedy_count;
  r.diagnostics["uncovered_probes"] = uncovered;
  r.diagnostics["filled_volume"] = filled;
  r.diagnostics["packing"] = packing_to_json(packing);
  r.check("separation", sep >= 2.0 * R, format_number(sep) + " >= " + format_number(2.0 * R));
  r.check("covering", uncovered == 0, std::to_string(uncovered) + " of " + std::to_string(probes) + " probes uncovered");
  r.check("volume", filled <= m.total_volume(), format_number(filled) + " <= " + format_number(m.total_volume()));
  return r;
}

// ---------------------------------------------------------------------------
// Large values force large local mass

struct LargeValueOptions {
  std::vector<double> gammas;
  double eps = 0.1;
  bool assert_large_ratio = false;  // require ratio >= 1/eps at the enlarged radius for some gamma
  std::optional<QuadratureOrders> orders;
};

inline ExperimentReport largevalue_experiment(const EigenfunctionSpec& u, Point p, const LargeValueOptions& opt) {
  const Manifold m = u.manifold();
  if (opt.gammas.empty()) throw std::invalid_argument("gamma_list must not be empty");
  if (!(opt.eps > 0.0 && opt.eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  for (double g : opt.gammas) {
    if (!(g > 0.0)) throw std::invalid_argument("gamma values must be > 0");
  }
  p = reduce(m, p);
  const double lam = u.lambda();
  const double n = m.dimension();
  const double M = std::abs(u.value(p));
  const double big_scale = std::pow(M, 2.0 / n);
  const bool large = M >= 1.0;

  std::vector<double> gammas = opt.gammas;
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  ExperimentReport r = detail::new_report("largevalue", u);
  r.parameters["center"] = detail::point_json(p);
  r.parameters["gamma_list"] = gammas;
  r.parameters["eps"] = opt.eps;
  r.table.columns = {"gamma", "r", "ratio", "gamma_M2", "value_bound_holds", "sup_half_sq", "c_mv",
                     "r_large", "ratio_large", "large_ratio_holds", "mass_monotone", "skipped"};

  std::optional<double> admissible;
  bool prefix = true;
  bool chain_ok = true, monotone_ok = true, large_any = false;
  for (double g : gammas) {
    const double r1 = g / lam;
    const double r2 = g * big_scale / lam;
    if (r1 > m.injectivity_radius()) {
      r.table.add({g, r1, nullptr, g * M * M, nullptr, nullptr, nullptr, r2, nullptr, nullptr, nullptr, "radius"});
      prefix = false;
      continue;
    }
    const MassRecord m1 = local_mass_ratio(u, p, r1, opt.eps, opt.orders);
    const double ratio1 = m1.unnormalized_ratio();
    const bool holds = ratio1 >= g * M * M;
    const double half = sup_on_ball(SupTarget::Value, u, p, 0.5 * r1);
    const double sup_half_sq = std::max(half * half, M * M);
    const double c_mv = ratio1 / sup_half_sq;
    chain_ok = chain_ok && ratio1 >= c_mv * M * M * (1.0 - 1e-12);
    if (prefix && holds) {
      admissible = g;
    } else {
      prefix = false;
    }
    if (!large || r2 > m.injectivity_radius()) {
      r.table.add({g, r1, ratio1, g * M * M, holds, sup_half_sq, c_mv, r2, nullptr, nullptr, nullptr,
                   large ? "radius" : "small_value"});
      continue;
    }
    const MassRecord m2 = local_mass_ratio(u, p, r2, opt.eps, opt.orders);
    const double ratio2 = m2.unnormalized_ratio();
    const bool big = ratio2 >= 1.0 / opt.eps;
    const bool mono = m2.local_mass >= m1.local_mass * (1.0 - 1e-12);
    large_any = large_any || big;
    monotone_ok = monotone_ok && mono;
    r.table.add({g, r1, ratio1, g * M * M, holds, sup_half_sq, c_mv, r2, ratio2, big, mono, ""});
  }
  r.diagnostics["M"] = M;
  r.diagnostics["hormander_ratio"] = M / std::pow(lam, 0.5 * (n - 1.0));
  r.diagnostics["admissible_gamma"] = admissible ? Json(*admissible) : Json(nullptr);
  r.diagnostics["large_ratio_attained"] = large_any;
  r.check("mean_value_chain", chain_ok, "ratio >= c_mv M^2 at every gamma");
  r.check("mass_monotone_in_radius", monotone_ok);
  r.check("admissible_gamma_exists", admissible.has_value());
  if (opt.assert_large_ratio) {
    r.check("large_ratio", large && large_any, "ratio >= 1/eps at r = gamma M^(2/n) / lambda for some gamma");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Highest weight harmonics

enum class HwMode { Equator, Pole };

struct HwExampleOptions {
  std::vector<int> ks{16, 36, 64};
  HwMode mode = HwMode::Equator;
  double delta = 1.0;
  double theta_offset = 0.0;          // equator: center colatitude pi/2 + offset
  std::optional<double> phi;          // equator: default pi / (2k), a maximum of |u|
  double r_pole = 0.5;
  std::size_t fit_index = 0;          // pole: k used to fit C
};

inline ExperimentReport highest_weight_example(const HwExampleOptions& opt) {
  if (opt.ks.empty()) throw std::invalid_argument("k list must not be empty");
  for (int k : opt.ks) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
  }
  const Manifold m = Manifold::sphere();
  ExperimentReport r;
  r.kind = "hwexample";
  r.manifold = std::string(to_string(m.kind));
  r.family = "hw:k=" + [&] {
    std::string s;
    for (std::size_t i = 0; i < opt.ks.size(); ++i) s += (i ? "|" : "") + std::to_string(opt.ks[i]);
    return s;
  }();
  r.parameters["k_list"] = opt.ks;
  r.parameters["mode"] = opt.mode == HwMode::Equator ? "equator" : "pole";

  if (opt.mode == HwMode::Equator) {
    if (!(opt.delta > 0.0 && opt.delta <= 1.0)) throw std::invalid_argument("delta must lie in (0, 1]");
    for (int k : opt.ks) {
      if (std::abs(opt.theta_offset) >= 0.05 / std::sqrt(static_cast<double>(k))) {
        throw std::invalid_argument("theta_offset must satisfy |offset| < k^(-1/2) / 20");
      }
    }
    r.parameters["delta"] = opt.delta;
    r.parameters["theta_offset"] = opt.theta_offset;
    r.table.columns = {"k", "theta", "phi", "r", "ratio", "ratio_over_sqrt_k", "rho"};
    double lo = INFINITY, hi = 0.0;
    for (int k : opt.ks) {
      const EigenfunctionSpec u = EigenfunctionSpec::highest_weight(k);
      const double phi = opt.phi.value_or(kPi / (2.0 * k));
      const Point q = sphere_point(0.5 * kPi + opt.theta_offset, phi);
      const double rad = opt.delta / k;
      const MassRecord rec = local_mass_ratio(u, q, rad);
      const double ratio = rec.unnormalized_ratio();
      const double scaled = ratio / std::sqrt(static_cast<double>(k));
      lo = std::min(lo, scaled);
      hi = std::max(hi, scaled);
      r.table.add({k, q[0], q[1], rad, ratio, scaled, rec.ratio});
    }
    r.diagnostics["band_factor"] = hi / lo;
    r.check("ratio_over_sqrt_k_band", hi / lo <= 2.0, "max/min = " + format_number(hi / lo));
    return r;
  }

  if (!(opt.r_pole > 0.0 && opt.r_pole < 0.5 * kPi)) throw std::invalid_argument("r_pole must lie in (0, pi/2)");
  if (opt.fit_index >= opt.ks.size()) throw std::invalid_argument("fit_index out of range");
  r.parameters["r_pole"] = opt.r_pole;
  r.parameters["fit_k"] = opt.ks[opt.fit_index];
  const double rp = opt.r_pole;
  auto shape = [&](int k) {
    return std::pow(std::cos(rp), k + 2.0) / (std::sqrt(static_cast<double>(k)) * rp * rp);
  };
  std::vector<double> ratios;
  for (int k : opt.ks) {
    const EigenfunctionSpec u = EigenfunctionSpec::highest_weight(k);
    QuadratureOrders orders{128, std::max(64, 2 * k + 2)};
    ratios.push_back(local_mass_ratio(u, sphere_point(0.0, 0.0), rp, 0.1, orders).unnormalized_ratio());
  }
  const double C = ratios[opt.fit_index] / shape(opt.ks[opt.fit_index]);
  r.diagnostics["C"] = C;
  r.table.columns = {"k", "r", "ratio", "bound", "within_bound"};
  bool within = true, decreasing = true;
  for (std::size_t i = 0; i < opt.ks.size(); ++i) {
    const double bound = C * shape(opt.ks[i]);
    const bool ok = ratios[i] <= bound * (1.0 + 1e-12);
    within = within && ok;
    if (i > 0) decreasing = decreasing && ratios[i] < ratios[i - 1];
    r.table.add({opt.ks[i], rp, ratios[i], bound, ok});
  }
  r.check("ratio_within_bound", within);
  r.check("ratio_decreasing_in_k", decreasing);
  if (opt.ks.size() >= 2) {
    r.check("ratio_decays", ratios.back() < 0.1 * ratios.front(),
            format_number(ratios.back()) + " < 0.1 * " + format_number(ratios.front()));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Mean value constants for the gradient

inline ExperimentReport mean_value_diagnostic(const EigenfunctionSpec& u, double a, std::uint64_t seed,
                                              std::optional<QuadratureOrders> orders = {}) {
  require_nonconstant(u);
  const Manifold m = u.manifold();
  if (!(a > 0.0) || a / u.lambda() > 0.5 * m.injectivity_radius()) {
    throw std::invalid_argument("a must be > 0 with a / lambda <= injectivity radius / 2");
  }
  const Packing packing = maximal_disjoint_packing(m, a / u.lambda(), seed);
  const double R = packing.radius;
  const std::size_t J = packing.size();
  std::vector<double> c0(J, NAN), sup_sq(J, 0.0), energy(J, 0.0);
  parallel_for(J, [&](std::size_t j) {
    const Point p = packing.centers[j];
    const double s = sup_on_ball(SupTarget::GradientNorm, u, p, 2.0 * R / 3.0);
    sup_sq[j] = s * s;
    energy[j] = ball_gradient_energy(u, p, R, orders);
    if (energy[j] >= 1e-14 * u.eigenvalue_sq()) c0[j] = sup_sq[j] * ball_volume(m, R) / energy[j];
  });
  ExperimentReport r = detail::new_report("mvi", u);
  r.parameters["a"] = a;
  r.parameters["R"] = R;
  r.parameters["seed"] = seed;
  r.table.columns = {"ball_index", "center_0", "center_1", "sup_grad_sq", "grad_energy", "c0", "skipped"};
  std::vector<double> finite;
  std::size_t skipped = 0;
  bool all_ge_one = true;
  for (std::size_t j = 0; j < J; ++j) {
    const bool skip = std::isnan(c0[j]);
    if (skip) {
      ++skipped;
      r.table.add({j, packing.centers[j][0], packing.centers[j][1], sup_sq[j], energy[j], nullptr, true});
      continue;
    }
    finite.push_back(c0[j]);
    all_ge_one = all_ge_one && c0[j] >= 1.0;
    r.table.add({j, packing.centers[j][0], packing.centers[j][1], sup_sq[j], energy[j], c0[j], false});
  }
  r.packing = PackingSummary{J, J - skipped};
  r.diagnostics["c0_max"] = finite.empty() ? 0.0 : *std::max_element(finite.begin(), finite.end());
  r.diagnostics["c0_median"] = detail::median(finite);
  r.diagnostics["skipped_flat"] = skipped;
  r.check("c0_at_least_one", all_ge_one);
  return r;
}

// ---------------------------------------------------------------------------
// Sup-norm growth

struct SupNorms {
  double sup_u = 0.0;
  double sup_grad = 0.0;
};

/// Sampled global sups at spacing lambda^{-1} * spacing_factor with local refinement.
inline SupNorms global_sups(const EigenfunctionSpec& u, double spacing_factor = 0.125) {
  const double lam = std::max(1.0, u.lambda());
  const double h = std::min(0.05, spacing_factor / lam);
  SupNorms s;
  s.sup_u = sup_over_manifold(u.manifold(), h, [&](Point p) { return std::abs(u.value(p)); }).value;
  s.sup_grad = sup_over_manifold(u.manifold(), h, [&](Point p) { return u.value_gradient(p).gradient.norm(); }).value;
  return s;
}

inline std::string weyl_group(const EigenfunctionSpec& u) {
  std::string g = std::string(to_string(u.manifold().kind)) + "/";
  switch (u.family()) {
    case FamilyKind::Constant: return g + "const";
    case FamilyKind::CircleMode: return g + "cos";
    case FamilyKind::TorusMode: return g + "torus-" + to_string(u.preset());
    case FamilyKind::ZonalHarmonic: return g + "zonal";
    case FamilyKind::HighestWeight: return g + "hw";
    case FamilyKind::RandomSphereMode: return g + "sphrand";
  }
  return g;
}

inline ExperimentReport weyl_monitor(const std::vector<EigenfunctionSpec>& suite, double spacing_factor = 0.125) {
  if (suite.empty()) throw std::invalid_argument("weyl_monitor: empty family suite");
  ExperimentReport r;
  r.kind = "weyl";
  r.manifold = std::string(to_string(suite.front().manifold().kind));
  r.family = "suite";
  r.parameters["spacing_factor"] = spacing_factor;
  r.table.columns = {"family", "group", "lambda", "sup_u", "sup_grad", "ratio_u", "ratio_grad", "saturating"};
  std::vector<SupNorms> sups(suite.size());
  parallel_for(suite.size(), [&](std::size_t i) { sups[i] = global_sups(suite[i], spacing_factor); });

  struct Row {
    double lambda, ratio_u, ratio_grad;
  };
  std::map<std::string, std::vector<Row>> groups;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const EigenfunctionSpec& u = suite[i];
    require_nonconstant(u);
    const double n = u.manifold().dimension();
    const double lam = u.lambda();
    const double ru = sups[i].sup_u / std::pow(lam, 0.5 * (n - 1.0));
    const double rg = sups[i].sup_grad / std::pow(lam, 0.5 * (n + 1.0));
    const bool saturating = u.family() == FamilyKind::ZonalHarmonic;
    r.table.add({u.descriptor(), weyl_group(u), lam, sups[i].sup_u, sups[i].sup_grad, ru, rg, saturating});
    groups[weyl_group(u)].push_back({lam, ru, rg});
  }
  bool bounded = true;
  std::string detail;
  for (auto& [name, rows] : groups) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.lambda < b.lambda; });
    const double gu = rows.back().ratio_u / rows.front().ratio_u;
    const double gg = rows.back().ratio_grad / rows.front().ratio_grad;
    const bool ok = gu <= 1.5 && gg <= 1.5;
    bounded = bounded && ok;
    detail += name + ": growth " + format_number(gu) + "/" + format_number(gg) + "; ";
  }
  r.check("sup_ratios_bounded", bounded, detail);
  return r;
}

// ---------------------------------------------------------------------------
// Analytic gradient vs finite differences

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t points = 0;
};

inline GradientCheck gradient_fd_check(const EigenfunctionSpec& u, std::size_t points = 100,
                                       std::uint64_t seed = 1, double step = 1e-6) {
  const Manifold m = u.manifold();
  const CounterRng rng(seed, 0x67726164);
  const double floor = 1e-3 * std::max(1.0, u.lambda()) / std::sqrt(m.total_volume());
  GradientCheck out;
  out.points = points;
  for (std::size_t i = 0; i < points; ++i) {
    const Point p = random_point(m, rng, i);
    const Gradient g = u.value_gradient(p).gradient;
    auto diff = [&](Tangent v) {
      const Tangent w{-v.t0, -v.t1};
      return (u.value(exp_map(m, p, v)) - u.value(exp_map(m, p, w))) / (2.0 * step);
    };
    const double d0 = diff({step, 0.0});
    const double d1 = m.kind == ManifoldKind::Circle ? 0.0 : diff({0.0, step});
    const double err = std::hypot(d0 - g.d0, d1 - g.d1) / std::max(g.norm(), floor);
    out.max_relative_error = std::max(out.max_relative_error, err);
  }
  return out;
}

}  // namespace planck

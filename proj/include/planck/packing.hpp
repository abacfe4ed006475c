#pragma once

// Maximal disjoint packings by geodesic balls of radius R, and nodal-point
// localization inside a ball.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "planck/eigenfunction.hpp"
#include "planck/manifold.hpp"
#include "planck/sampling.hpp"

namespace planck {

/// Disjoint R-balls whose centers are 2R-separated and 2R-covering.
struct Packing {
  Manifold manifold;
  double radius = 0.0;
  std::vector<Point> centers;
  std::uint64_t seed = 0;
  std::size_t greedy_count = 0;  // centers accepted by the greedy pass

  std::size_t size() const { return centers.size(); }
};

namespace detail {

// Fast separation tests against a growing center set.
class CenterSet {
 public:
  CenterSet(Manifold m, double separation) : m_(m), sep_(separation), cos_sep_(std::cos(separation)) {}

  void add(Point p) {
    pts_.push_back(p);
    if (m_.kind == ManifoldKind::Sphere2) vecs_.push_back(to_cartesian(p));
  }

  /// True iff p is at distance > separation (times 1 + slack) from every center.
  bool separated(Point p, double slack = 0.0) const {
    const double sep = sep_ * (1.0 + slack);
    switch (m_.kind) {
      case ManifoldKind::Circle:
        for (const Point& c : pts_) {
          if (std::abs(wrap_signed(p[0] - c[0])) < sep) return false;
        }
        return true;
      case ManifoldKind::Torus2: {
        const double sep2 = sep * sep;
        for (const Point& c : pts_) {
          const double a = wrap_signed(p[0] - c[0]), b = wrap_signed(p[1] - c[1]);
          if (a * a + b * b < sep2) return false;
        }
        return true;
      }
      case ManifoldKind::Sphere2: {
        const Vec3 x = to_cartesian(p);
        const double cs = slack == 0.0 ? cos_sep_ : std::cos(sep);
        for (const Vec3& c : vecs_) {
          if (dot(x, c) > cs) {
            // Near the threshold fall back to the exact distance.
            if (std::atan2(norm(cross(x, c)), dot(x, c)) < sep) return false;
          }
        }
        return true;
      }
    }
    return true;
  }

  const std::vector<Point>& points() const { return pts_; }

 private:
  Manifold m_;
  double sep_;
  double cos_sep_;
  std::vector<Point> pts_;
  std::vector<Vec3> vecs_;
};

// Voronoi vertices of the center set that lie farther than 2R from every
// center are uncovered points; each is a valid new center. The farthest
// point from a finite set is always a Voronoi vertex, so when no vertex is
// uncovered the set is exactly 2R-covering.
inline std::vector<Point> uncovered_vertices(Manifold m, const std::vector<Point>& centers,
                                             double R) {
  std::vector<Point> out;
  const double cover = 2.0 * R;
  const double reach = 5.0 * R;
  switch (m.kind) {
    case ManifoldKind::Circle: {
      std::vector<double> xs;
      for (const Point& c : centers) xs.push_back(c[0]);
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double a = xs[i];
        const double b = i + 1 < xs.size() ? xs[i + 1] : xs.front() + kTwoPi;
        if (0.5 * (b - a) > cover) out.push_back(circle_point(0.5 * (a + b)));
      }
      break;
    }
    case ManifoldKind::Torus2: {
      const int shifts = static_cast<int>(std::ceil(reach / kTwoPi)) + 1;
      for (std::size_t i = 0; i < centers.size(); ++i) {
        std::vector<std::array<double, 2>> nb;
        for (std::size_t j = 0; j < centers.size(); ++j) {
          for (int sa = -shifts; sa <= shifts; ++sa) {
            for (int sb = -shifts; sb <= shifts; ++sb) {
              if (j == i && sa == 0 && sb == 0) continue;
              const double dx = centers[j][0] - centers[i][0] + kTwoPi * sa;
              const double dy = centers[j][1] - centers[i][1] + kTwoPi * sb;
              if (dx * dx + dy * dy < reach * reach) nb.push_back({dx, dy});
            }
          }
        }
        for (std::size_t a = 0; a < nb.size(); ++a) {
          for (std::size_t b = a + 1; b < nb.size(); ++b) {
            const auto& p = nb[a];
            const auto& q = nb[b];
            const double d = 2.0 * (p[0] * q[1] - p[1] * q[0]);
            if (std::abs(d) < 1e-14) continue;
            const double pp = p[0] * p[0] + p[1] * p[1], qq = q[0] * q[0] + q[1] * q[1];
            const double vx = (q[1] * pp - p[1] * qq) / d;
            const double vy = (p[0] * qq - q[0] * pp) / d;
            const double rr = vx * vx + vy * vy;
            if (rr <= cover * cover) continue;
            bool covered = false;
            for (const auto& n : nb) {
              const double ex = vx - n[0], ey = vy - n[1];
              if (ex * ex + ey * ey <= cover * cover) {
                covered = true;
                break;
              }
            }
            if (!covered) out.push_back(torus_point(centers[i][0] + vx, centers[i][1] + vy));
          }
        }
      }
      break;
    }
    case ManifoldKind::Sphere2: {
      std::vector<Vec3> v;
      for (const Point& c : centers) v.push_back(to_cartesian(c));
      const double cos_reach = reach >= kPi ? -2.0 : std::cos(reach);
      const double cos_cover = std::cos(cover);
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::vector<std::size_t> nb;
        for (std::size_t j = 0; j < v.size(); ++j) {
          if (j != i && dot(v[i], v[j]) > cos_reach) nb.push_back(j);
        }
        for (std::size_t a = 0; a < nb.size(); ++a) {
          if (nb[a] < i) continue;
          for (std::size_t b = a + 1; b < nb.size(); ++b) {
            if (nb[b] < i) continue;
            const Vec3& p = v[i];
            const Vec3& q = v[nb[a]];
            const Vec3& s = v[nb[b]];
            Vec3 n = cross(Vec3{q[0] - p[0], q[1] - p[1], q[2] - p[2]},
                           Vec3{s[0] - p[0], s[1] - p[1], s[2] - p[2]});
            const double len = norm(n);
            if (len < 1e-14) continue;
            for (double sign : {1.0, -1.0}) {
              const Vec3 w{sign * n[0] / len, sign * n[1] / len, sign * n[2] / len};
              if (dot(w, p) >= cos_cover) continue;
              bool covered = false;
              for (std::size_t j : nb) {
                if (dot(w, v[j]) >= cos_cover) {
                  covered = true;
                  break;
                }
              }
              if (!covered) out.push_back(from_cartesian(w));
            }
          }
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Greedy maximal disjoint packing: candidates at spacing R/2 are accepted
/// in order iff they lie at distance >= 2R from all accepted centers; the
/// remaining uncovered Voronoi vertices are then inserted until the center
/// set is 2R-covering.
inline Packing maximal_disjoint_packing(Manifold m, double R, std::uint64_t seed = 0) {
  if (!(R > 0.0) || R > 0.5 * m.injectivity_radius()) {
    throw std::domain_error("maximal_disjoint_packing: R must lie in (0, injectivity radius / 2]");
  }
  Packing packing{m, R, {}, seed, 0};
  detail::CenterSet set(m, 2.0 * R);
  for (const Point& c : candidate_centers(m, 0.5 * R, seed)) {
    if (set.separated(c)) set.add(c);
  }
  packing.greedy_count = set.points().size();
  for (int pass = 0; pass < 64; ++pass) {
    bool added = false;
    for (const Point& v : detail::uncovered_vertices(m, set.points(), R)) {
      if (set.separated(v)) {
        set.add(v);
        added = true;
      }
    }
    if (!added) break;
  }
  if (set.points().size() <= 4) {
    // Too few centers for a meaningful Voronoi diagram: probe densely.
    for (const Point& c : candidate_centers(m, R / 16.0, seed)) {
      if (set.separated(c)) set.add(c);
    }
  }
  packing.centers = set.points();
  return packing;
}

/// Largest distance from `probes` to the nearest packing center.
inline double covering_defect(const Packing& packing, const std::vector<Point>& probes) {
  double worst = 0.0;
  for (const Point& p : probes) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& c : packing.centers) {
      best = std::min(best, geodesic_distance(packing.manifold, p, c));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Smallest pairwise center distance.
inline double min_separation(const Packing& packing) {
  double best = std::numeric_limits<double>::infinity();
  const auto& c = packing.centers;
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      best = std::min(best, geodesic_distance(packing.manifold, c[i], c[j]));
    }
  }
  return best;
}

inline nlohmann::ordered_json packing_to_json(const Packing& packing) {
  nlohmann::ordered_json j;
  j["manifold"] = std::string(to_string(packing.manifold.kind));
  j["radius"] = packing.radius;
  j["seed"] = packing.seed;
  nlohmann::ordered_json centers = nlohmann::ordered_json::array();
  for (const Point& c : packing.centers) {
    if (packing.manifold.kind == ManifoldKind::Circle) {
      centers.push_back({c[0]});
    } else {
      centers.push_back({c[0], c[1]});
    }
  }
  j["centers"] = std::move(centers);
  return j;
}

inline Packing packing_from_json(const nlohmann::ordered_json& j) {
  Packing packing;
  packing.manifold = manifold_from_string(j.at("manifold").get<std::string>());
  packing.radius = j.at("radius").get<double>();
  packing.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& c : j.at("centers")) {
    Point p{{c.at(0).get<double>(), c.size() > 1 ? c.at(1).get<double>() : 0.0}};
    packing.centers.push_back(reduce(packing.manifold, p));
  }
  packing.greedy_count = packing.centers.size();
  return packing;
}

// ---------------------------------------------------------------------------
// Nodal points

struct BisectionResult {
  double t = 0.0;          // best abscissa
  double residual = 0.0;   // |f(t)|
  int steps = 0;
  std::vector<double> trace;  // best residual after each step
};

/// Bisection on [lo, hi] where f(lo), f(hi) have opposite signs (or one is
/// zero). Stops when the best residual drops to `tol`, the bracket cannot
/// be split further, or after `max_steps`.
template <class F>
BisectionResult bisect_sign_change(F&& f, double lo, double hi, double f_lo, double f_hi,
                                   double tol, int max_steps = 200, bool keep_trace = false) {
  BisectionResult r;
  if (std::abs(f_lo) <= std::abs(f_hi)) {
    r.t = lo;
    r.residual = std::abs(f_lo);
  } else {
    r.t = hi;
    r.residual = std::abs(f_hi);
  }
  if (keep_trace) r.trace.push_back(r.residual);
  while (r.residual > tol && r.steps < max_steps) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= std::min(lo, hi) || mid >= std::max(lo, hi)) break;
    const double f_mid = f(mid);
    ++r.steps;
    if (std::abs(f_mid) < r.residual) {
      r.residual = std::abs(f_mid);
      r.t = mid;
    }
    if (keep_trace) r.trace.push_back(r.residual);
    if (f_mid == 0.0) break;
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return r;
}

struct NodalOptions {
  double tolerance_factor = 1e-10;  // tol = factor * sup_{ball} |u|
  int radial_steps = 32;            // sample spacing = search_radius / radial_steps
  int max_bisections = 200;
};

struct NodalRecord {
  std::size_t ball_index = 0;
  std::optional<Point> q;
  double residual = 0.0;
  double search_radius = 0.0;
  double tolerance = 0.0;
  int bisection_steps = 0;
  bool used_full_sweep = false;
  // Filled when no sign change was found.
  double min_sample_abs = 0.0;
  double gradient_sup = 0.0;
  bool positivity_certified = false;

  bool found() const { return q.has_value(); }
};

/// Searches B(center, search_radius) for a zero of u: radial transects at
/// spacing search_radius / 32 (a full 2D sweep as fallback) locate a sign
/// change between neighboring samples, which is then bisected along the
/// connecting geodesic.
inline NodalRecord find_nodal_point(const EigenfunctionSpec& u, Point center,
                                    double search_radius, NodalOptions opt = {}) {
  const Manifold m = u.manifold();
  require_ball_radius(m, search_radius);
  center = reduce(m, center);
  NodalRecord rec;
  rec.search_radius = search_radius;
  rec.tolerance = opt.tolerance_factor * sup_on_ball(SupTarget::Value, u, center, search_radius);
  const double h = search_radius / opt.radial_steps;

  const double u0 = u.value(center);
  if (std::abs(u0) <= rec.tolerance) {
    rec.q = center;
    rec.residual = std::abs(u0);
    return rec;
  }

  auto finish = [&](Point a, Point b, double fa, double fb) {
    auto along = [&](double t) { return u.value(geodesic_interpolate(m, a, b, t)); };
    const BisectionResult br =
        bisect_sign_change(along, 0.0, 1.0, fa, fb, rec.tolerance, opt.max_bisections);
    rec.bisection_steps = br.steps;
    rec.residual = br.residual;
    if (br.residual <= rec.tolerance) rec.q = geodesic_interpolate(m, a, b, br.t);
  };

  // Radial transects; keep the sign change closest to the center.
  const int rays = m.kind == ManifoldKind::Circle
                       ? 2
                       : std::max(8, static_cast<int>(std::ceil(kTwoPi * opt.radial_steps)));
  int best_step = -1;
  Point best_a, best_b;
  double best_fa = 0.0, best_fb = 0.0;
  double min_abs = std::abs(u0);
  for (int ray = 0; ray < rays; ++ray) {
    const double alpha = kTwoPi * ray / rays;
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    Point prev = center;
    double f_prev = u0;
    for (int i = 1; i <= opt.radial_steps; ++i) {
      if (best_step >= 0 && i > best_step) break;
      const double rho = i * h;
      const Point p = exp_map(m, center, Tangent{rho * ca, rho * sa});
      const double f = u.value(p);
      min_abs = std::min(min_abs, std::abs(f));
      if ((f <= 0.0) != (f_prev <= 0.0) || f == 0.0) {
        if (best_step < 0 || i < best_step) {
          best_step = i;
          best_a = prev;
          best_b = p;
          best_fa = f_prev;
          best_fb = f;
        }
        break;
      }
      prev = p;
      f_prev = f;
    }
  }
  if (best_step >= 0) {
    finish(best_a, best_b, best_fa, best_fb);
    return rec;
  }

  // Fallback: full grid sweep over the ball.
  rec.used_full_sweep = true;
  const int n = opt.radial_steps;
  const int side = m.kind == ManifoldKind::Circle ? 0 : n;
  auto idx = [&](int i, int j) { return static_cast<std::size_t>((i + n) * (2 * side + 1) + (j + side)); };
  std::vector<double> vals(static_cast<std::size_t>(2 * n + 1) * (2 * side + 1),
                           std::numeric_limits<double>::quiet_NaN());
  std::vector<Point> pts(vals.size());
  for (int i = -n; i <= n; ++i) {
    for (int j = -side; j <= side; ++j) {
      if (i * i + j * j > n * n) continue;
      const Point p = exp_map(m, center, Tangent{i * h, j * h});
      pts[idx(i, j)] = p;
      vals[idx(i, j)] = u.value(p);
      min_abs = std::min(min_abs, std::abs(vals[idx(i, j)]));
    }
  }
  for (int i = -n; i <= n; ++i) {
    for (int j = -side; j <= side; ++j) {
      const double f = vals[idx(i, j)];
      if (std::isnan(f)) continue;
      const int di[2] = {1, 0}, dj[2] = {0, 1};
      for (int d = 0; d < 2; ++d) {
        const int i2 = i + di[d], j2 = j + dj[d];
        if (i2 > n || j2 > side) continue;
        const double g = vals[idx(i2, j2)];
        if (std::isnan(g)) continue;
        if ((f <= 0.0) != (g <= 0.0)) {
          finish(pts[idx(i, j)], pts[idx(i2, j2)], f, g);
          if (rec.found()) return rec;
        }
      }
    }
  }

  // No sign change: record the sampled positivity certificate.
  rec.min_sample_abs = min_abs;
  rec.gradient_sup = sup_on_ball(SupTarget::GradientNorm, u, center, search_radius);
  rec.positivity_certified = min_abs > 1.05 * rec.gradient_sup * h;
  rec.residual = min_abs;
  return rec;
}

}  // namespace planck

#pragma once

// Deterministic point sets: covering candidate grids, dense ball samples, and
// sampled suprema with local refinement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "planck/manifold.hpp"
#include "planck/random.hpp"

namespace planck {

/// Covering candidate set: every point of M lies within `spacing` of some
/// candidate. Uniform grids on circle/torus, a Fibonacci lattice on the
/// sphere. A nonzero seed shifts (circle/torus) or rotates about the polar
/// axis (sphere) the whole set.
inline std::vector<Point> candidate_centers(Manifold m, double spacing, std::uint64_t seed = 0) {
  if (!(spacing > 0.0) || spacing >= m.injectivity_radius()) {
    throw std::domain_error("candidate_centers: spacing must lie in (0, injectivity radius)");
  }
  const CounterRng rng(seed, 0x63616e64);
  std::vector<Point> out;
  switch (m.kind) {
    case ManifoldKind::Circle: {
      const int n = static_cast<int>(std::ceil(kTwoPi / spacing));
      const double step = kTwoPi / n;
      const double off = seed == 0 ? 0.0 : step * rng.uniform(0);
      for (int i = 0; i < n; ++i) out.push_back(circle_point(off + i * step));
      break;
    }
    case ManifoldKind::Torus2: {
      const int n = static_cast<int>(std::ceil(kTwoPi / (std::numbers::sqrt2 * spacing)));
      const double step = kTwoPi / n;
      const double o1 = seed == 0 ? 0.0 : step * rng.uniform(0);
      const double o2 = seed == 0 ? 0.0 : step * rng.uniform(1);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out.push_back(torus_point(o1 + i * step, o2 + j * step));
      }
      break;
    }
    case ManifoldKind::Sphere2: {
      // One point per spacing^2 of area leaves a covering radius near
      // 0.62 * spacing for the near-hexagonal Fibonacci arrangement.
      const int n = std::max(8, static_cast<int>(std::ceil(4.0 * kPi / (spacing * spacing))));
      const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
      const double off = seed == 0 ? 0.0 : kTwoPi * rng.uniform(0);
      for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        out.push_back(sphere_point(std::acos(z), off + golden_angle * i));
      }
      break;
    }
  }
  return out;
}

/// Tangent offsets covering a ball of radius r with grid spacing <= h: a
/// square (or 1D) grid clipped to the disk plus a boundary ring.
inline std::vector<Tangent> ball_offsets(Manifold m, double r, double h) {
  const int steps = std::max(1, static_cast<int>(std::ceil(r / h)));
  const double s = r / steps;
  std::vector<Tangent> out;
  if (m.kind == ManifoldKind::Circle) {
    for (int i = -steps; i <= steps; ++i) out.push_back({i * s, 0.0});
    return out;
  }
  for (int i = -steps; i <= steps; ++i) {
    for (int j = -steps; j <= steps; ++j) {
      if (i * i + j * j <= steps * steps) out.push_back({i * s, j * s});
    }
  }
  const int ring = std::max(8, static_cast<int>(std::ceil(kTwoPi * r / s)));
  for (int k = 0; k < ring; ++k) {
    const double a = kTwoPi * k / ring;
    out.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return out;
}

struct SampledSup {
  double value = 0.0;
  Point argmax;
  double refinement_gain = 0.0;  // relative increase achieved by refinement
  std::size_t evaluations = 0;
};

/// Refines a sampled maximum of f around tangent offset `best` within the
/// ball B(center, r) by a shrinking 5x5 (or 5-point) grid.
template <class F>
void refine_sup(Manifold m, Point center, double r, double h, Tangent best, SampledSup& sup,
                F&& f) {
  const double before = sup.value;
  double step = 0.5 * h;
  const int reach = 2;
  const bool line = m.kind == ManifoldKind::Circle;
  for (int level = 0; level < 8; ++level) {
    Tangent level_best = best;
    for (int i = -reach; i <= reach; ++i) {
      for (int j = line ? 0 : -reach; j <= (line ? 0 : reach); ++j) {
        if (i == 0 && j == 0) continue;
        Tangent v{best.t0 + i * step, best.t1 + j * step};
        const double len = v.length();
        if (len > r) {
          v.t0 *= r / len;
          v.t1 *= r / len;
        }
        const Point p = exp_map(m, center, v);
        const double val = f(p);
        ++sup.evaluations;
        if (val > sup.value) {
          sup.value = val;
          sup.argmax = p;
          level_best = v;
        }
      }
    }
    best = level_best;
    step *= 0.5;
  }
  sup.refinement_gain = before > 0.0 ? (sup.value - before) / before : 0.0;
}

/// Sampled supremum of f over B(center, r) at grid spacing <= h followed by
/// one local refinement pass. The result is a lower bound of the true sup.
template <class F>
SampledSup sup_over_ball(Manifold m, Point center, double r, double h, F&& f) {
  SampledSup sup;
  sup.value = -1.0;
  Tangent best{};
  for (const Tangent& v : ball_offsets(m, r, h)) {
    const Point p = exp_map(m, center, v);
    const double val = f(p);
    ++sup.evaluations;
    if (val > sup.value) {
      sup.value = val;
      sup.argmax = p;
      best = v;
    }
  }
  refine_sup(m, center, r, std::min(h, r), best, sup, f);
  return sup;
}

/// Global sample grid with spacing <= h (sphere rows include both poles).
inline std::vector<Point> global_samples(Manifold m, double h) {
  std::vector<Point> out;
  switch (m.kind) {
    case ManifoldKind::Circle: {
      const int n = static_cast<int>(std::ceil(kTwoPi / h));
      for (int i = 0; i < n; ++i) out.push_back(circle_point(kTwoPi * i / n));
      break;
    }
    case ManifoldKind::Torus2: {
      const int n = static_cast<int>(std::ceil(kTwoPi / h));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) out.push_back(torus_point(kTwoPi * i / n, kTwoPi * j / n));
      }
      break;
    }
    case ManifoldKind::Sphere2: {
      const int rows = static_cast<int>(std::ceil(kPi / h));
      for (int i = 0; i <= rows; ++i) {
        const double theta = kPi * i / rows;
        const int n = std::max(1, static_cast<int>(std::ceil(kTwoPi * std::sin(theta) / h)));
        for (int j = 0; j < n; ++j) out.push_back(Point{{theta, kTwoPi * j / n}});
      }
      break;
    }
  }
  return out;
}

/// Sampled global supremum of f with refinement around the `top` best
/// samples.
template <class F>
SampledSup sup_over_manifold(Manifold m, double h, F&& f, std::size_t top = 8) {
  const std::vector<Point> pts = global_samples(m, h);
  std::vector<std::pair<double, std::size_t>> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = {f(pts[i]), i};
  top = std::min(top, vals.size());
  std::partial_sort(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(top), vals.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  SampledSup best;
  best.value = vals.front().first;
  best.argmax = pts[vals.front().second];
  best.evaluations = pts.size();
  for (std::size_t k = 0; k < top; ++k) {
    SampledSup local;
    local.value = vals[k].first;
    local.argmax = pts[vals[k].second];
    refine_sup(m, local.argmax, 2.0 * h, 2.0 * h, Tangent{}, local, f);
    best.evaluations += local.evaluations;
    if (local.value > best.value) {
      best.value = local.value;
      best.argmax = local.argmax;
    }
  }
  return best;
}

}  // namespace planck

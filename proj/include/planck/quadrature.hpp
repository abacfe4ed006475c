#pragma once

// Quadrature over geodesic balls and whole model manifolds.
//
// Ball rules are polar product rules: Gauss-Legendre in the geodesic radius
// composed with a uniform angular rule. On the sphere the polar-cap rule at
// the north pole is rotated onto the ball center. Global rules are tensor
// products (uniform trapezoid grids on circle/torus, Gauss-Legendre in
// cos(theta) times uniform in phi on the sphere) exact for trigonometric /
// spherical polynomials of the requested degree.

#include <cmath>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "planck/manifold.hpp"

namespace planck {

struct GaussRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

namespace detail {

// Legendre P_n(x) and its derivative by the three-term recurrence.
inline std::pair<double, double> legendre_pn(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = detail::legendre_pn(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre_pn(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

struct BallRegion {
  Point center;
  double radius = 0.0;
};

struct GlobalRegion {};

using Region = std::variant<BallRegion, GlobalRegion>;

struct QuadratureOrders {
  int radial = 32;
  int angular = 64;
};

/// Immutable set of nodes and positive volume weights.
struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
  Region region;
  int order = 0;

  std::size_t size() const { return nodes.size(); }

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// Polar product rule on B(center, r).
inline QuadratureRule ball_rule(Manifold m, Point center, double r,
                                QuadratureOrders orders = {}) {
  require_ball_radius(m, r);
  if (orders.radial < 2 || orders.angular < 2) {
    throw std::invalid_argument("ball_rule: quadrature order must be >= 2");
  }
  center = reduce(m, center);
  QuadratureRule rule;
  rule.region = BallRegion{center, r};
  rule.order = orders.radial;
  const GaussRule g = gauss_legendre(orders.radial);

  if (m.kind == ManifoldKind::Circle) {
    rule.nodes.reserve(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      rule.nodes.push_back(circle_point(center[0] + r * g.nodes[i]));
      rule.weights.push_back(r * g.weights[i]);
    }
    return rule;
  }

  const int na = orders.angular;
  const double dalpha = kTwoPi / na;
  rule.nodes.reserve(g.nodes.size() * na);
  rule.weights.reserve(g.nodes.size() * na);
  const bool sphere = m.kind == ManifoldKind::Sphere2;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double rho = 0.5 * r * (g.nodes[i] + 1.0);
    const double jac = sphere ? std::sin(rho) : rho;
    const double w = 0.5 * r * g.weights[i] * jac * dalpha;
    for (int j = 0; j < na; ++j) {
      const double alpha = (j + 0.5) * dalpha;
      rule.nodes.push_back(
          exp_map(m, center, Tangent{rho * std::cos(alpha), rho * std::sin(alpha)}));
      rule.weights.push_back(w);
    }
  }
  if (sphere) {
    // Gauss in the colatitude integrates sin(rho) only to ~machine precision
    // at high order; pin the weight sum to the exact cap area.
    const double scale = ball_volume(m, r) / rule.weight_sum();
    for (double& w : rule.weights) w *= scale;
  }
  return rule;
}

/// Global rule exact for trigonometric (circle/torus) or spherical (sphere)
/// polynomials of total degree <= order.
inline QuadratureRule global_rule(Manifold m, int order) {
  if (order < 2) throw std::invalid_argument("global_rule: order must be >= 2");
  QuadratureRule rule;
  rule.region = GlobalRegion{};
  rule.order = order;
  const int n = order + 1;
  const double h = kTwoPi / n;
  switch (m.kind) {
    case ManifoldKind::Circle:
      for (int i = 0; i < n; ++i) {
        rule.nodes.push_back(circle_point(i * h));
        rule.weights.push_back(h);
      }
      break;
    case ManifoldKind::Torus2:
      rule.nodes.reserve(static_cast<std::size_t>(n) * n);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          rule.nodes.push_back(torus_point(i * h, j * h));
          rule.weights.push_back(h * h);
        }
      }
      break;
    case ManifoldKind::Sphere2: {
      const GaussRule g = gauss_legendre(order / 2 + 1);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double theta = std::acos(g.nodes[i]);
        for (int j = 0; j < n; ++j) {
          rule.nodes.push_back(Point{{theta, j * h}});
          rule.weights.push_back(g.weights[i] * h);
        }
      }
      break;
    }
  }
  return rule;
}

/// Dispatch on region. For balls `order` is the radial order and the angular
/// order is twice that.
inline QuadratureRule quadrature(Manifold m, const Region& region, int order) {
  if (const auto* ball = std::get_if<BallRegion>(&region)) {
    return ball_rule(m, ball->center, ball->radius, QuadratureOrders{order, 2 * order});
  }
  return global_rule(m, order);
}

/// Exact volume of a region.
inline double region_volume(Manifold m, const Region& region) {
  if (const auto* ball = std::get_if<BallRegion>(&region)) {
    return ball_volume(m, ball->radius);
  }
  return m.total_volume();
}

}  // namespace planck

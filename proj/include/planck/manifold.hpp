#pragma once

// Model manifolds (unit circle, flat square torus, round unit sphere) and
// their exact geodesic geometry.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace planck {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class ManifoldKind { Circle, Torus2, Sphere2 };

struct Manifold {
  ManifoldKind kind = ManifoldKind::Circle;

  static constexpr Manifold circle() { return {ManifoldKind::Circle}; }
  static constexpr Manifold torus() { return {ManifoldKind::Torus2}; }
  static constexpr Manifold sphere() { return {ManifoldKind::Sphere2}; }

  constexpr int dimension() const { return kind == ManifoldKind::Circle ? 1 : 2; }

  constexpr double total_volume() const {
    switch (kind) {
      case ManifoldKind::Circle: return kTwoPi;
      case ManifoldKind::Torus2: return kTwoPi * kTwoPi;
      case ManifoldKind::Sphere2: return 4.0 * kPi;
    }
    return 0.0;
  }

  constexpr double injectivity_radius() const { return kPi; }

  double diameter() const {
    return kind == ManifoldKind::Torus2 ? kPi * std::sqrt(2.0) : kPi;
  }

  friend constexpr bool operator==(Manifold, Manifold) = default;
};

inline std::string_view to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::Circle: return "circle";
    case ManifoldKind::Torus2: return "torus";
    case ManifoldKind::Sphere2: return "sphere";
  }
  return "?";
}

inline Manifold manifold_from_string(std::string_view name) {
  if (name == "circle") return Manifold::circle();
  if (name == "torus") return Manifold::torus();
  if (name == "sphere") return Manifold::sphere();
  throw std::invalid_argument("unknown manifold '" + std::string(name) + "'");
}

/// Reduce an angle to [0, 2pi). A value that rounds up to 2pi maps to 0.
inline double wrap_angle(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0.0) y += kTwoPi;
  if (y >= kTwoPi) y = 0.0;
  return y;
}

/// Signed minimal representative of x modulo 2pi, in [-pi, pi).
inline double wrap_signed(double x) {
  double y = wrap_angle(x + kPi) - kPi;
  return y;
}

/// Point in chart coordinates (radians).
///   circle: coords[0] = x, coords[1] unused (0)
///   torus:  (x1, x2)
///   sphere: (theta, phi), theta in [0, pi]
struct Point {
  std::array<double, 2> coords{0.0, 0.0};

  double operator[](std::size_t i) const { return coords[i]; }
  friend bool operator==(const Point&, const Point&) = default;
};

inline Point circle_point(double x) { return Point{{wrap_angle(x), 0.0}}; }

inline Point torus_point(double x1, double x2) {
  return Point{{wrap_angle(x1), wrap_angle(x2)}};
}

inline Point sphere_point(double theta, double phi) {
  double t = wrap_angle(theta);
  if (t > kPi) {
    t = kTwoPi - t;
    phi += kPi;
  }
  t = std::clamp(t, 0.0, kPi);
  return Point{{t, wrap_angle(phi)}};
}

inline Point reduce(Manifold m, Point p) {
  switch (m.kind) {
    case ManifoldKind::Circle: return circle_point(p[0]);
    case ManifoldKind::Torus2: return torus_point(p[0], p[1]);
    case ManifoldKind::Sphere2: return sphere_point(p[0], p[1]);
  }
  return p;
}

using Vec3 = std::array<double, 3>;

inline Vec3 to_cartesian(Point p) {
  const double st = std::sin(p[0]);
  return {st * std::cos(p[1]), st * std::sin(p[1]), std::cos(p[0])};
}

inline Point from_cartesian(const Vec3& v) {
  const double rho = std::hypot(v[0], v[1]);
  const double theta = std::atan2(rho, v[2]);
  const double phi = rho == 0.0 ? 0.0 : std::atan2(v[1], v[0]);
  return Point{{std::clamp(theta, 0.0, kPi), wrap_angle(phi)}};
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Orthonormal tangent frame (e_theta, e_phi) at a sphere point. At the poles
/// the frame is the limit along the meridian phi = p[1].
inline std::array<Vec3, 2> sphere_frame(Point p) {
  const double ct = std::cos(p[0]), st = std::sin(p[0]);
  const double cp = std::cos(p[1]), sp = std::sin(p[1]);
  return {Vec3{ct * cp, ct * sp, -st}, Vec3{-sp, cp, 0.0}};
}

/// Tangent vector in the orthonormal chart frame at some base point.
/// On the circle only t[0] is used.
struct Tangent {
  double t0 = 0.0;
  double t1 = 0.0;
  double length() const { return std::hypot(t0, t1); }
};

/// Exponential map: the point reached by following the geodesic from `base`
/// with initial velocity `v` for unit time.
inline Point exp_map(Manifold m, Point base, Tangent v) {
  switch (m.kind) {
    case ManifoldKind::Circle: return circle_point(base[0] + v.t0);
    case ManifoldKind::Torus2: return torus_point(base[0] + v.t0, base[1] + v.t1);
    case ManifoldKind::Sphere2: {
      const double rho = v.length();
      if (rho == 0.0) return base;
      // Rotation taking the north pole to `base`, applied to the polar-cap
      // point at colatitude rho in direction (v.t0, v.t1).
      const Vec3 c = to_cartesian(base);
      const auto [e_theta, e_phi] = sphere_frame(base);
      const double cr = std::cos(rho), sr = std::sin(rho) / rho;
      Vec3 q;
      for (int i = 0; i < 3; ++i) {
        q[i] = cr * c[i] + sr * (v.t0 * e_theta[i] + v.t1 * e_phi[i]);
      }
      return from_cartesian(q);
    }
  }
  return base;
}

/// Inverse of exp_map for points inside the injectivity radius.
inline Tangent log_map(Manifold m, Point base, Point q) {
  switch (m.kind) {
    case ManifoldKind::Circle: return {wrap_signed(q[0] - base[0]), 0.0};
    case ManifoldKind::Torus2:
      return {wrap_signed(q[0] - base[0]), wrap_signed(q[1] - base[1])};
    case ManifoldKind::Sphere2: {
      const Vec3 c = to_cartesian(base);
      const Vec3 x = to_cartesian(q);
      const auto [e_theta, e_phi] = sphere_frame(base);
      const double a = dot(x, e_theta), b = dot(x, e_phi);
      const double s = std::hypot(a, b);
      if (s == 0.0) return {};
      const double angle = std::atan2(s, dot(x, c));
      return {angle * a / s, angle * b / s};
    }
  }
  return {};
}

inline double geodesic_distance(Manifold m, Point p, Point q) {
  switch (m.kind) {
    case ManifoldKind::Circle: return std::abs(wrap_signed(q[0] - p[0]));
    case ManifoldKind::Torus2:
      return std::hypot(wrap_signed(q[0] - p[0]), wrap_signed(q[1] - p[1]));
    case ManifoldKind::Sphere2: {
      // Haversine keeps relative accuracy for nearby points.
      const double st = std::sin(0.5 * (q[0] - p[0])), sp = std::sin(0.5 * (q[1] - p[1]));
      const double h = st * st + std::sin(p[0]) * std::sin(q[0]) * sp * sp;
      if (h < 0.5) return 2.0 * std::asin(std::sqrt(h));
      const Vec3 a = to_cartesian(p), b = to_cartesian(q);
      return std::atan2(norm(cross(a, b)), dot(a, b));
    }
  }
  return 0.0;
}

/// Point at fraction t of the minimizing geodesic from p to q.
inline Point geodesic_interpolate(Manifold m, Point p, Point q, double t) {
  const Tangent v = log_map(m, p, q);
  return exp_map(m, p, Tangent{t * v.t0, t * v.t1});
}

inline void require_ball_radius(Manifold m, double r) {
  if (!(r > 0.0) || r > m.injectivity_radius()) {
    throw std::domain_error("ball radius " + std::to_string(r) +
                            " outside (0, injectivity radius]");
  }
}

/// Riemannian volume of a geodesic ball of radius r (independent of center).
inline double ball_volume(Manifold m, double r) {
  require_ball_radius(m, r);
  switch (m.kind) {
    case ManifoldKind::Circle: return 2.0 * r;
    case ManifoldKind::Torus2: return kPi * r * r;
    case ManifoldKind::Sphere2: {
      const double s = std::sin(0.5 * r);
      return 4.0 * kPi * s * s;  // 2pi(1 - cos r) without cancellation
    }
  }
  return 0.0;
}

}  // namespace planck

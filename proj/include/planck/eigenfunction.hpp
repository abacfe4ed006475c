#pragma once

// Closed-form Laplacian eigenfunctions on the model manifolds.
//
// Families:
//   const       u = Vol(M)^{-1/2}                                  (lambda^2 = 0)
//   cos         u = cos(k x - phase) / sqrt(pi) on the circle       (k^2)
//   torus       u = c sum_k a_k sin(k.x) + b_k cos(k.x), |k|^2 = N   (N)
//   zonal       u = pbar_l^0(theta)                                 (l(l+1))
//   hw          u = k^{1/4} sin^k(theta) sin(k phi), unnormalized   (k(k+1))
//   sphrand     u = normalized Gaussian combination of degree-l     (l(l+1))
//               real spherical harmonics
//
// All families except `hw` are normalized to unit L2 norm. The highest
// weight harmonic is kept in its closed form and carries its exact norm.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "planck/legendre.hpp"
#include "planck/manifold.hpp"
#include "planck/quadrature.hpp"
#include "planck/random.hpp"
#include "planck/sampling.hpp"

namespace planck {

enum class FamilyKind { Constant, CircleMode, TorusMode, ZonalHarmonic, HighestWeight, RandomSphereMode };

enum class TorusPreset { Full, Pair, Random, Custom };

inline std::string to_string(TorusPreset p) {
  switch (p) {
    case TorusPreset::Full: return "full";
    case TorusPreset::Pair: return "pair";
    case TorusPreset::Random: return "random";
    case TorusPreset::Custom: return "custom";
  }
  return "?";
}

inline TorusPreset torus_preset_from_string(const std::string& s) {
  if (s == "full") return TorusPreset::Full;
  if (s == "pair") return TorusPreset::Pair;
  if (s == "random") return TorusPreset::Random;
  throw std::invalid_argument("unknown torus preset '" + s + "'");
}

struct LatticePoint {
  int k1 = 0;
  int k2 = 0;
  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

/// All (k1, k2) in Z^2 with k1^2 + k2^2 = N, in lexicographic order.
inline std::vector<LatticePoint> lattice_points(long N) {
  if (N < 1) throw std::invalid_argument("lattice_points: N must be >= 1");
  std::vector<LatticePoint> out;
  const int bound = static_cast<int>(std::sqrt(static_cast<double>(N))) + 1;
  for (int a = -bound; a <= bound; ++a) {
    const long rest = N - static_cast<long>(a) * a;
    if (rest < 0) continue;
    const int b = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rest))));
    if (static_cast<long>(b) * b != rest) continue;
    if (b == 0) {
      out.push_back({a, 0});
    } else {
      out.push_back({a, -b});
      out.push_back({a, b});
    }
  }
  return out;
}

/// One torus term a sin(k.x) + b cos(k.x).
struct TorusTerm {
  LatticePoint k;
  double a = 0.0;
  double b = 0.0;
};

/// Tangent gradient in the orthonormal chart frame: d/dx (circle),
/// (d/dx1, d/dx2) (torus), (d/dtheta, (1/sin theta) d/dphi) (sphere).
struct Gradient {
  double d0 = 0.0;
  double d1 = 0.0;
  double norm() const { return std::hypot(d0, d1); }
  double norm_sq() const { return d0 * d0 + d1 * d1; }
};

struct ValueGradient {
  double value = 0.0;
  Gradient gradient;
};

/// Immutable description of one eigenfunction.
class EigenfunctionSpec {
 public:
  static EigenfunctionSpec constant(Manifold m) {
    EigenfunctionSpec u(m, FamilyKind::Constant);
    u.normalization_ = 1.0 / std::sqrt(m.total_volume());
    return u;
  }

  static EigenfunctionSpec circle_mode(int k, double phase = 0.0) {
    if (k < 1) throw std::invalid_argument("cos: k must be >= 1");
    EigenfunctionSpec u(Manifold::circle(), FamilyKind::CircleMode);
    u.k_ = k;
    u.phase_ = phase;
    u.eigenvalue_sq_ = static_cast<double>(k) * k;
    u.normalization_ = 1.0 / std::sqrt(kPi);
    return u;
  }

  static EigenfunctionSpec torus_mode(long N, TorusPreset preset, std::uint64_t seed = 0) {
    const std::vector<LatticePoint> pts = lattice_points(N);
    if (pts.empty()) {
      throw std::invalid_argument("torus: N=" + std::to_string(N) + " is not a sum of two squares");
    }
    std::vector<TorusTerm> terms;
    switch (preset) {
      case TorusPreset::Full:
        for (const auto& k : pts) terms.push_back({k, 1.0, 1.0});
        break;
      case TorusPreset::Pair:
        terms.push_back({pts.front(), 0.0, 1.0});
        terms.push_back({{-pts.front().k1, -pts.front().k2}, 0.0, 1.0});
        break;
      case TorusPreset::Random: {
        const CounterRng rng(seed, 0x746f7275);
        std::uint64_t i = 0;
        for (const auto& k : pts) {
          const double a = rng.normal(i++);
          const double b = rng.normal(i++);
          terms.push_back({k, a, b});
        }
        break;
      }
      case TorusPreset::Custom:
        throw std::invalid_argument("torus: use torus_terms for custom coefficients");
    }
    EigenfunctionSpec u = torus_terms(std::move(terms));
    u.preset_ = preset;
    u.seed_ = preset == TorusPreset::Random ? seed : 0;
    u.lattice_n_ = N;
    return u;
  }

  static EigenfunctionSpec torus_terms(std::vector<TorusTerm> terms) {
    if (terms.empty()) throw std::invalid_argument("torus: no lattice terms");
    const long N = static_cast<long>(terms.front().k.k1) * terms.front().k.k1 +
                   static_cast<long>(terms.front().k.k2) * terms.front().k.k2;
    if (N == 0) throw std::invalid_argument("torus: zero frequency term");
    // Collect cos/sin coefficients on one representative of each +-k pair.
    std::vector<std::pair<LatticePoint, std::pair<double, double>>> canon;
    for (const auto& t : terms) {
      const long n = static_cast<long>(t.k.k1) * t.k.k1 + static_cast<long>(t.k.k2) * t.k.k2;
      if (n != N) throw std::invalid_argument("torus: lattice terms must share |k|^2");
      const bool positive = t.k.k1 > 0 || (t.k.k1 == 0 && t.k.k2 > 0);
      const LatticePoint rep = positive ? t.k : LatticePoint{-t.k.k1, -t.k.k2};
      auto it = std::find_if(canon.begin(), canon.end(),
                             [&](const auto& c) { return c.first == rep; });
      if (it == canon.end()) {
        canon.push_back({rep, {0.0, 0.0}});
        it = canon.end() - 1;
      }
      it->second.first += positive ? t.a : -t.a;  // sin is odd
      it->second.second += t.b;                   // cos is even
    }
    double sum_sq = 0.0;
    for (const auto& c : canon) {
      sum_sq += c.second.first * c.second.first + c.second.second * c.second.second;
    }
    if (!(sum_sq > 0.0)) throw std::invalid_argument("torus: coefficients cancel to zero");
    EigenfunctionSpec u(Manifold::torus(), FamilyKind::TorusMode);
    u.terms_ = std::move(terms);
    u.preset_ = TorusPreset::Custom;
    u.lattice_n_ = N;
    u.eigenvalue_sq_ = static_cast<double>(N);
    // ||cos(k.x)||^2 = ||sin(k.x)||^2 = 2 pi^2 on the 2pi-periodic torus.
    u.normalization_ = 1.0 / std::sqrt(2.0 * kPi * kPi * sum_sq);
    return u;
  }

  static EigenfunctionSpec zonal(int l) {
    if (l < 1) throw std::invalid_argument("zonal: l must be >= 1");
    EigenfunctionSpec u(Manifold::sphere(), FamilyKind::ZonalHarmonic);
    u.degree_ = l;
    u.eigenvalue_sq_ = static_cast<double>(l) * (l + 1);
    u.table_ = std::make_shared<const LegendreTable>(l);
    return u;
  }

  static EigenfunctionSpec highest_weight(int k) {
    if (k < 1) throw std::invalid_argument("hw: k must be >= 1");
    EigenfunctionSpec u(Manifold::sphere(), FamilyKind::HighestWeight);
    u.degree_ = k;
    u.eigenvalue_sq_ = static_cast<double>(k) * (k + 1);
    u.normalization_ = std::pow(static_cast<double>(k), 0.25);
    u.norm_sq_ = highest_weight_norm_sq(k);
    return u;
  }

  static EigenfunctionSpec random_sphere(int l, std::uint64_t seed) {
    if (l < 1) throw std::invalid_argument("sphrand: l must be >= 1");
    EigenfunctionSpec u(Manifold::sphere(), FamilyKind::RandomSphereMode);
    u.degree_ = l;
    u.seed_ = seed;
    u.eigenvalue_sq_ = static_cast<double>(l) * (l + 1);
    u.table_ = std::make_shared<const LegendreTable>(l);
    // coeffs_[0] -> m = 0; coeffs_[2m-1], coeffs_[2m] -> cos, sin of order m.
    const CounterRng rng(seed, 0x73706872);
    u.coeffs_.resize(2 * static_cast<std::size_t>(l) + 1);
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < u.coeffs_.size(); ++i) {
      u.coeffs_[i] = rng.normal(i);
      sum_sq += u.coeffs_[i] * u.coeffs_[i];
    }
    u.normalization_ = 1.0 / std::sqrt(sum_sq);
    return u;
  }

  /// ||u_k||^2 = sqrt(k) pi int_0^pi sin^{2k+1} by the Wallis recurrence.
  static double highest_weight_norm_sq(int k) {
    double w = 2.0;  // int_0^pi sin^1
    for (int m = 3; m <= 2 * k + 1; m += 2) w *= (m - 1.0) / m;
    return std::sqrt(static_cast<double>(k)) * kPi * w;
  }

  Manifold manifold() const { return manifold_; }
  FamilyKind family() const { return family_; }
  double eigenvalue_sq() const { return eigenvalue_sq_; }
  double lambda() const { return std::sqrt(eigenvalue_sq_); }
  double normalization_constant() const { return normalization_; }
  /// Exact squared L2 norm: 1 for normalized families.
  double norm_sq() const { return norm_sq_; }
  int wavenumber() const { return k_; }
  double phase() const { return phase_; }
  int degree() const { return degree_; }
  long lattice_n() const { return lattice_n_; }
  TorusPreset preset() const { return preset_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<TorusTerm>& terms() const { return terms_; }
  const std::vector<double>& sphere_coefficients() const { return coeffs_; }

  /// Largest coordinate frequency: the trigonometric degree of u.
  int max_frequency() const {
    switch (family_) {
      case FamilyKind::Constant: return 0;
      case FamilyKind::CircleMode: return k_;
      case FamilyKind::TorusMode: {
        int f = 0;
        for (const auto& t : terms_) f = std::max({f, std::abs(t.k.k1), std::abs(t.k.k2)});
        return f;
      }
      default: return degree_;
    }
  }

  /// Family grammar descriptor, e.g. "zonal:l=20".
  std::string descriptor() const {
    switch (family_) {
      case FamilyKind::Constant: return "const";
      case FamilyKind::CircleMode:
        return phase_ == 0.0 ? "cos:k=" + std::to_string(k_)
                             : "cos:k=" + std::to_string(k_) + ",phase=" + format_double(phase_);
      case FamilyKind::TorusMode:
        if (preset_ == TorusPreset::Random) {
          return "torus:N=" + std::to_string(lattice_n_) + ",preset=random,seed=" +
                 std::to_string(seed_);
        }
        return "torus:N=" + std::to_string(lattice_n_) + ",preset=" + to_string(preset_);
      case FamilyKind::ZonalHarmonic: return "zonal:l=" + std::to_string(degree_);
      case FamilyKind::HighestWeight: return "hw:k=" + std::to_string(degree_);
      case FamilyKind::RandomSphereMode:
        return "sphrand:l=" + std::to_string(degree_) + ",seed=" + std::to_string(seed_);
    }
    return "?";
  }

  double value(Point p) const { return evaluate(p, false).value; }

  ValueGradient value_gradient(Point p) const { return evaluate(p, true); }

  /// -(second derivatives) of the closed form on circle/torus; none on the
  /// sphere, where the eigen-relation is checked through Green's identity.
  std::optional<double> laplacian(Point p) const {
    if (family_ == FamilyKind::Constant) return 0.0;
    if (family_ == FamilyKind::CircleMode) {
      return normalization_ * k_ * k_ * std::cos(k_ * p[0] - phase_);
    }
    if (family_ == FamilyKind::TorusMode) {
      double s = 0.0;
      for (const auto& t : terms_) {
        const double arg = t.k.k1 * p[0] + t.k.k2 * p[1];
        const double kk = static_cast<double>(t.k.k1) * t.k.k1 + static_cast<double>(t.k.k2) * t.k.k2;
        s += kk * (t.a * std::sin(arg) + t.b * std::cos(arg));
      }
      return normalization_ * s;
    }
    return std::nullopt;
  }

 private:
  EigenfunctionSpec(Manifold m, FamilyKind f) : manifold_(m), family_(f) {}

  static std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  }

  ValueGradient evaluate(Point p, bool with_gradient) const {
    ValueGradient out;
    switch (family_) {
      case FamilyKind::Constant:
        out.value = normalization_;
        break;
      case FamilyKind::CircleMode: {
        const double arg = k_ * p[0] - phase_;
        out.value = normalization_ * std::cos(arg);
        if (with_gradient) out.gradient.d0 = -normalization_ * k_ * std::sin(arg);
        break;
      }
      case FamilyKind::TorusMode: {
        double v = 0.0, g0 = 0.0, g1 = 0.0;
        for (const auto& t : terms_) {
          const double arg = t.k.k1 * p[0] + t.k.k2 * p[1];
          const double s = std::sin(arg), c = std::cos(arg);
          v += t.a * s + t.b * c;
          if (with_gradient) {
            const double d = t.a * c - t.b * s;
            g0 += d * t.k.k1;
            g1 += d * t.k.k2;
          }
        }
        out.value = normalization_ * v;
        out.gradient = {normalization_ * g0, normalization_ * g1};
        break;
      }
      case FamilyKind::ZonalHarmonic: {
        out.value = table_->value(degree_, 0, p[0]);
        if (with_gradient) {
          const double l = degree_;
          out.gradient.d0 = -std::sqrt(l * (l + 1.0)) * table_->value(degree_, 1, p[0]);
        }
        break;
      }
      case FamilyKind::HighestWeight: {
        const double k = degree_;
        const double s = std::sin(p[0]);
        const double skm1 = std::pow(s, k - 1.0);
        const double sk = skm1 * s;
        out.value = normalization_ * sk * std::sin(k * p[1]);
        if (with_gradient) {
          out.gradient.d0 = normalization_ * k * skm1 * std::cos(p[0]) * std::sin(k * p[1]);
          out.gradient.d1 = normalization_ * k * skm1 * std::cos(k * p[1]);
        }
        break;
      }
      case FamilyKind::RandomSphereMode:
        out = evaluate_sphere_combination(p, with_gradient);
        break;
    }
    return out;
  }

  ValueGradient evaluate_sphere_combination(Point p, bool with_gradient) const {
    const int l = degree_;
    thread_local std::vector<double> row;
    row.resize(static_cast<std::size_t>(l) + 2);
    table_->row(l, p[0], std::span<double>(row.data(), static_cast<std::size_t>(l) + 1));
    row[l + 1] = 0.0;
    const double s = std::sin(p[0]);
    const bool pole = s == 0.0;
    const double c1 = std::cos(p[1]), s1 = std::sin(p[1]);
    const double sqrt2 = std::numbers::sqrt2;
    const double ld = l;
    double v = coeffs_[0] * row[0];
    double g_theta = with_gradient ? -coeffs_[0] * std::sqrt(ld * (ld + 1.0)) * row[1] : 0.0;
    double g_phi = 0.0;
    // cos(m phi), sin(m phi) by the angle-addition recurrence.
    double cm = 1.0, sm = 0.0;
    for (int m = 1; m <= l; ++m) {
      const double cn = cm * c1 - sm * s1;
      sm = sm * c1 + cm * s1;
      cm = cn;
      const double a = coeffs_[2 * m - 1], b = coeffs_[2 * m];
      const double angular = a * cm + b * sm;
      v += sqrt2 * row[m] * angular;
      if (with_gradient) {
        const double dm = 0.5 * (std::sqrt((ld + m) * (ld - m + 1.0)) * row[m - 1] -
                                 std::sqrt((ld + m + 1.0) * (ld - m)) * row[m + 1]);
        g_theta += sqrt2 * dm * angular;
        double over_sin;
        if (!pole) {
          over_sin = row[m] / s;
        } else {
          // pbar_l^m / sin(theta) -> 0 for m >= 2; for m = 1 the limit is
          // N_l1 P_l'(1) = sqrt((2l+1)/(4pi) / (l(l+1))) l(l+1)/2.
          const double parity = (p[0] == 0.0 || l % 2 == 1) ? 1.0 : -1.0;
          over_sin = m == 1
                         ? 0.5 * std::sqrt((2.0 * ld + 1.0) / (4.0 * kPi) * ld * (ld + 1.0)) * parity
                         : 0.0;
        }
        g_phi += sqrt2 * m * over_sin * (b * cm - a * sm);
      }
    }
    ValueGradient out;
    out.value = normalization_ * v;
    out.gradient = {normalization_ * g_theta, normalization_ * g_phi};
    return out;
  }

  Manifold manifold_;
  FamilyKind family_;
  double eigenvalue_sq_ = 0.0;
  double normalization_ = 1.0;
  double norm_sq_ = 1.0;
  int k_ = 0;
  double phase_ = 0.0;
  int degree_ = 0;
  long lattice_n_ = 0;
  TorusPreset preset_ = TorusPreset::Custom;
  std::uint64_t seed_ = 0;
  std::vector<TorusTerm> terms_;
  std::vector<double> coeffs_;
  std::shared_ptr<const LegendreTable> table_;
};

inline double evaluate(const EigenfunctionSpec& u, Point p) { return u.value(p); }

inline Gradient gradient(const EigenfunctionSpec& u, Point p) {
  return u.value_gradient(p).gradient;
}

/// Trigonometric degree sufficient for exact global integration of |u|^2
/// and |grad u|^2.
inline int global_order(const EigenfunctionSpec& u) {
  return std::max(4, 4 * u.max_frequency() + 4);
}

struct NormIntegrals {
  double mass = 0.0;           // int |u|^2
  double gradient_sq = 0.0;    // int |grad u|^2
  double gradient_abs = 0.0;   // int |grad u|
};

inline NormIntegrals global_integrals(const EigenfunctionSpec& u, int order = 0) {
  const QuadratureRule rule = global_rule(u.manifold(), order > 0 ? order : global_order(u));
  NormIntegrals out;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const ValueGradient vg = u.value_gradient(rule.nodes[i]);
    const double w = rule.weights[i];
    out.mass += w * vg.value * vg.value;
    out.gradient_sq += w * vg.gradient.norm_sq();
    out.gradient_abs += w * vg.gradient.norm();
  }
  return out;
}

/// L2(M) norm by global quadrature.
inline double l2_norm(const EigenfunctionSpec& u, int order = 0) {
  const QuadratureRule rule = global_rule(u.manifold(), order > 0 ? order : global_order(u));
  return std::sqrt(rule.integrate([&](Point p) {
    const double v = u.value(p);
    return v * v;
  }));
}

enum class SupTarget { Value, GradientNorm };

/// Default sampling spacing for sups on B(p, r): min(r, 1/lambda) / 16.
inline double sup_spacing(const EigenfunctionSpec& u, double r) {
  const double lam = u.lambda();
  return (lam > 0.0 ? std::min(r, 1.0 / lam) : r) / 16.0;
}

inline SampledSup sup_on_ball_detail(SupTarget target, const EigenfunctionSpec& u, Point p,
                                     double r) {
  require_ball_radius(u.manifold(), r);
  const double h = sup_spacing(u, r);
  if (target == SupTarget::Value) {
    return sup_over_ball(u.manifold(), p, r, h, [&](Point q) { return std::abs(u.value(q)); });
  }
  return sup_over_ball(u.manifold(), p, r, h,
                       [&](Point q) { return u.value_gradient(q).gradient.norm(); });
}

/// Sampled sup of |u| or |grad u| over B(p, r); a lower bound of the true sup.
inline double sup_on_ball(SupTarget target, const EigenfunctionSpec& u, Point p, double r) {
  return sup_on_ball_detail(target, u, p, r).value;
}

}  // namespace planck

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "planck/eigenfunction.hpp"
#include "planck/legendre.hpp"
#include "planck/random.hpp"

using namespace planck;

namespace {

std::vector<EigenfunctionSpec> normalized_suite() {
  return {EigenfunctionSpec::constant(Manifold::circle()),
          EigenfunctionSpec::constant(Manifold::torus()),
          EigenfunctionSpec::constant(Manifold::sphere()),
          EigenfunctionSpec::circle_mode(1),
          EigenfunctionSpec::circle_mode(20, 0.7),
          EigenfunctionSpec::torus_mode(25, TorusPreset::Full),
          EigenfunctionSpec::torus_mode(65, TorusPreset::Pair),
          EigenfunctionSpec::torus_mode(65, TorusPreset::Random, 3),
          EigenfunctionSpec::zonal(1),
          EigenfunctionSpec::zonal(20),
          EigenfunctionSpec::zonal(50),
          EigenfunctionSpec::random_sphere(12, 1),
          EigenfunctionSpec::random_sphere(30, 9)};
}

// Laplace-Beltrami by central differences in (theta, phi).
double sphere_fd_laplacian(const EigenfunctionSpec& u, double th, double ph, double h) {
  auto f = [&](double t, double p) { return u.value(sphere_point(t, p)); };
  const double c = f(th, ph);
  const double d2t = (f(th + h, ph) - 2 * c + f(th - h, ph)) / (h * h);
  const double dt = (f(th + h, ph) - f(th - h, ph)) / (2 * h);
  const double d2p = (f(th, ph + h) - 2 * c + f(th, ph - h)) / (h * h);
  const double s = std::sin(th);
  return d2t + std::cos(th) / s * dt + d2p / (s * s);
}

}  // namespace

TEST(Legendre, MatchesStdSphLegendre) {
  const LegendreTable t(60);
  for (int l = 0; l <= 60; l += 3) {
    for (int m = 0; m <= l; m += 2) {
      for (double th : {0.01, 0.4, 1.2, 2.0, 3.1}) {
        const double ref = std::abs(std::sph_legendre(l, m, th));
        EXPECT_NEAR(std::abs(t.value(l, m, th)), ref, 1e-11 * std::max(1.0, ref)) << l << " " << m;
      }
    }
  }
}

TEST(Legendre, RowAgreesWithValueAtHighDegree) {
  const LegendreTable t(512);
  std::vector<double> row(513);
  for (double th : {1e-3, 0.3, 1.5707, 2.9}) {
    t.row(512, th, row);
    for (int m : {0, 1, 100, 511, 512}) EXPECT_NEAR(row[m], t.value(512, m, th), 1e-12);
  }
  // Large degree against the library oracle.
  EXPECT_NEAR(std::abs(t.value(400, 0, 0.7)), std::abs(std::sph_legendre(400, 0, 0.7)), 1e-11);
}

TEST(Legendre, DegreeRange) {
  EXPECT_THROW(LegendreTable(513), std::invalid_argument);
  EXPECT_THROW(LegendreTable(-1), std::invalid_argument);
}

TEST(Lattice, CountsMatchBruteForce) {
  for (long N = 1; N <= 300; ++N) {
    std::vector<LatticePoint> brute;
    for (int a = -20; a <= 20; ++a) {
      for (int b = -20; b <= 20; ++b) {
        if (a * a + b * b == N) brute.push_back({a, b});
      }
    }
    EXPECT_EQ(lattice_points(N), brute) << "N=" << N;
  }
  EXPECT_EQ(lattice_points(25).size(), 12u);
  EXPECT_THROW(EigenfunctionSpec::torus_mode(3, TorusPreset::Full), std::invalid_argument);
}

TEST(Eigenfunction, NormalizedFamiliesHaveUnitMass) {
  for (const auto& u : normalized_suite()) {
    EXPECT_DOUBLE_EQ(u.norm_sq(), 1.0) << u.descriptor();
    EXPECT_NEAR(global_integrals(u).mass, 1.0, 1e-12) << u.descriptor();
  }
}

TEST(Eigenfunction, RandomTorusPresetsAreNormalized) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (long N : {5L, 50L, 325L}) {
      const auto u = EigenfunctionSpec::torus_mode(N, TorusPreset::Random, seed);
      EXPECT_NEAR(global_integrals(u).mass, 1.0, 1e-12);
    }
  }
}

TEST(Eigenfunction, HighestWeightNormWallis) {
  for (int k : {1, 2, 16, 64}) {
    const auto u = EigenfunctionSpec::highest_weight(k);
    EXPECT_NEAR(global_integrals(u).mass, u.norm_sq(), 1e-11 * u.norm_sq()) << k;
  }
  // k = 1: sqrt(1) * pi * 4/3.
  EXPECT_NEAR(EigenfunctionSpec::highest_weight_norm_sq(1), 4 * kPi / 3, 1e-14);
  // Wallis asymptotics: ||u_k||^2 -> pi^{3/2}.
  EXPECT_NEAR(EigenfunctionSpec::highest_weight_norm_sq(400), std::pow(kPi, 1.5), 2e-3 * std::pow(kPi, 1.5));
  // Peak value sup u^2 = sqrt(k) on the equator.
  const auto u = EigenfunctionSpec::highest_weight(36);
  EXPECT_NEAR(u.value(sphere_point(kPi / 2, kPi / 72)), std::pow(36.0, 0.25), 1e-12);
}

TEST(Eigenfunction, ZonalPoleValue) {
  for (int l : {1, 20, 50, 200, 512}) {
    const auto u = EigenfunctionSpec::zonal(l);
    EXPECT_NEAR(u.value(sphere_point(0, 0)), std::sqrt((2.0 * l + 1) / (4 * kPi)), 1e-12 * l);
  }
  EXPECT_THROW(EigenfunctionSpec::zonal(513), std::invalid_argument);
}

TEST(Eigenfunction, ZonalFirstZeroLiesBetweenBracketingRadii) {
  // The first zero of P_20(cos theta) sits near j_{0,1} / (l + 1/2) = 0.1173.
  const auto u = EigenfunctionSpec::zonal(20);
  EXPECT_GT(u.value(sphere_point(0.05, 0)), 0.0);
  EXPECT_GT(u.value(sphere_point(0.11, 0)), 0.0);
  EXPECT_LT(u.value(sphere_point(0.125, 0)), 0.0);
}

TEST(Eigenfunction, EigenRelationOnFlatManifolds) {
  const CounterRng rng(1);
  for (const auto& u : normalized_suite()) {
    const auto lap = u.laplacian(Point{});
    if (!lap) continue;
    for (std::uint64_t i = 0; i < 50; ++i) {
      const Point p = random_point(u.manifold(), rng, i);
      EXPECT_NEAR(*u.laplacian(p), u.eigenvalue_sq() * u.value(p), 1e-10 * (1 + u.eigenvalue_sq()));
    }
  }
}

TEST(Eigenfunction, EigenRelationOnSphereByFiniteDifferences) {
  const CounterRng rng(2);
  for (const auto& u : {EigenfunctionSpec::zonal(20), EigenfunctionSpec::highest_weight(16),
                        EigenfunctionSpec::random_sphere(12, 4)}) {
    for (std::uint64_t i = 0; i < 20; ++i) {
      const double th = 0.3 + 2.5 * rng.uniform(2 * i), ph = kTwoPi * rng.uniform(2 * i + 1);
      const double fd = sphere_fd_laplacian(u, th, ph, 1e-4);
      const double scale = u.eigenvalue_sq() * std::max(1.0, std::abs(u.normalization_constant()));
      EXPECT_NEAR(fd, -u.eigenvalue_sq() * u.value(sphere_point(th, ph)), 2e-4 * scale) << u.descriptor();
    }
  }
}

TEST(Eigenfunction, GradientMatchesFiniteDifferences) {
  const CounterRng rng(3);
  std::vector<EigenfunctionSpec> all = normalized_suite();
  all.push_back(EigenfunctionSpec::highest_weight(16));
  for (const auto& u : all) {
    const Manifold m = u.manifold();
    for (std::uint64_t i = 0; i < 40; ++i) {
      Point p = random_point(m, rng, i);
      if (m.kind == ManifoldKind::Sphere2) p = sphere_point(0.2 + 2.7 * rng.uniform(500 + i), p[1]);
      const Gradient g = gradient(u, p);
      const double h = 1e-6;
      const double d0 = (u.value(exp_map(m, p, {h, 0})) - u.value(exp_map(m, p, {-h, 0}))) / (2 * h);
      const double scale = 1 + u.lambda() * std::abs(u.normalization_constant() + 1);
      EXPECT_NEAR(g.d0, d0, 1e-6 * scale) << u.descriptor();
      if (m.kind != ManifoldKind::Circle) {
        const double d1 = (u.value(exp_map(m, p, {0, h})) - u.value(exp_map(m, p, {0, -h}))) / (2 * h);
        EXPECT_NEAR(g.d1, d1, 1e-6 * scale) << u.descriptor();
      }
    }
  }
}

TEST(Eigenfunction, GreenIntegralEqualsEigenvalue) {
  // int |grad u|^2 = lambda^2 int u^2 with exact global quadrature.
  for (const auto& u : normalized_suite()) {
    const NormIntegrals n = global_integrals(u);
    EXPECT_NEAR(n.gradient_sq, u.eigenvalue_sq() * n.mass, 1e-10 * (1 + u.eigenvalue_sq())) << u.descriptor();
  }
}

TEST(Eigenfunction, Descriptors) {
  EXPECT_EQ(EigenfunctionSpec::circle_mode(20).descriptor(), "cos:k=20");
  EXPECT_EQ(EigenfunctionSpec::circle_mode(3, 0.5).descriptor(), "cos:k=3,phase=0.5");
  EXPECT_EQ(EigenfunctionSpec::torus_mode(25, TorusPreset::Full).descriptor(), "torus:N=25,preset=full");
  EXPECT_EQ(EigenfunctionSpec::torus_mode(25, TorusPreset::Random, 4).descriptor(), "torus:N=25,preset=random,seed=4");
  EXPECT_EQ(EigenfunctionSpec::zonal(20).descriptor(), "zonal:l=20");
  EXPECT_EQ(EigenfunctionSpec::highest_weight(16).descriptor(), "hw:k=16");
  EXPECT_EQ(EigenfunctionSpec::random_sphere(7, 2).descriptor(), "sphrand:l=7,seed=2");
}

TEST(Eigenfunction, Eigenvalues) {
  EXPECT_EQ(EigenfunctionSpec::circle_mode(20).eigenvalue_sq(), 400.0);
  EXPECT_EQ(EigenfunctionSpec::torus_mode(25, TorusPreset::Pair).eigenvalue_sq(), 25.0);
  EXPECT_EQ(EigenfunctionSpec::zonal(20).eigenvalue_sq(), 420.0);
  EXPECT_EQ(EigenfunctionSpec::highest_weight(16).eigenvalue_sq(), 272.0);
  EXPECT_EQ(EigenfunctionSpec::constant(Manifold::sphere()).eigenvalue_sq(), 0.0);
}

TEST(Eigenfunction, InvalidParametersThrow) {
  EXPECT_THROW(EigenfunctionSpec::circle_mode(0), std::invalid_argument);
  EXPECT_THROW(EigenfunctionSpec::highest_weight(0), std::invalid_argument);
  EXPECT_THROW(EigenfunctionSpec::random_sphere(0, 1), std::invalid_argument);
  EXPECT_THROW(EigenfunctionSpec::torus_terms({}), std::invalid_argument);
  EXPECT_THROW(EigenfunctionSpec::torus_terms({{{3, 4}, 1, 0}, {{1, 2}, 1, 0}}), std::invalid_argument);
  EXPECT_THROW(EigenfunctionSpec::torus_terms({{{3, 4}, 0, 1}, {{-3, -4}, 0, -1}}), std::invalid_argument);
}

TEST(Eigenfunction, SupOnBallIsLowerBoundNearTruth) {
  const auto u = EigenfunctionSpec::circle_mode(20);
  const double s = sup_on_ball(SupTarget::Value, u, circle_point(0.3), 0.2);
  EXPECT_LE(s, 1 / std::sqrt(kPi) + 1e-15);
  EXPECT_NEAR(s, 1 / std::sqrt(kPi), 1e-9);
  const double g = sup_on_ball(SupTarget::GradientNorm, u, circle_point(0.3), 0.2);
  EXPECT_NEAR(g, 20 / std::sqrt(kPi), 1e-7);
}

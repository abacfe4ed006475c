#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include "planck/manifold.hpp"
#include "planck/parallel.hpp"
#include "planck/quadrature.hpp"
#include "planck/random.hpp"
#include "planck/sampling.hpp"

using namespace planck;

namespace {

const Manifold kAll[] = {Manifold::circle(), Manifold::torus(), Manifold::sphere()};

}  // namespace

TEST(Manifold, VolumesAndDiameters) {
  EXPECT_DOUBLE_EQ(Manifold::circle().total_volume(), 2 * kPi);
  EXPECT_DOUBLE_EQ(Manifold::torus().total_volume(), 4 * kPi * kPi);
  EXPECT_DOUBLE_EQ(Manifold::sphere().total_volume(), 4 * kPi);
  EXPECT_DOUBLE_EQ(Manifold::torus().diameter(), kPi * std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(Manifold::sphere().diameter(), kPi);
  EXPECT_DOUBLE_EQ(Manifold::circle().diameter(), kPi);
  for (const Manifold& m : kAll) EXPECT_DOUBLE_EQ(m.injectivity_radius(), kPi);
}

TEST(Manifold, NamesRoundTrip) {
  for (const Manifold& m : kAll) EXPECT_EQ(manifold_from_string(to_string(m.kind)), m);
  EXPECT_THROW(manifold_from_string("klein"), std::invalid_argument);
}

TEST(Manifold, BallVolumeClosedForms) {
  for (double r : {0.01, 0.1, 1.0, 2.0, kPi}) {
    EXPECT_NEAR(ball_volume(Manifold::circle(), r), 2 * r, 1e-15);
    EXPECT_NEAR(ball_volume(Manifold::torus(), r), kPi * r * r, 1e-13);
    EXPECT_NEAR(ball_volume(Manifold::sphere(), r), 2 * kPi * (1 - std::cos(r)), 1e-13);
  }
  EXPECT_NEAR(ball_volume(Manifold::sphere(), kPi), 4 * kPi, 1e-14);
}

TEST(Manifold, BallRadiusOutOfRangeThrows) {
  for (const Manifold& m : kAll) {
    EXPECT_THROW(ball_volume(m, 0.0), std::domain_error);
    EXPECT_THROW(ball_volume(m, -1.0), std::domain_error);
    EXPECT_THROW(ball_volume(m, kPi + 1e-9), std::domain_error);
  }
}

TEST(Manifold, WrapAngleRange) {
  EXPECT_EQ(wrap_angle(kTwoPi), 0.0);
  EXPECT_NEAR(wrap_angle(-0.5), kTwoPi - 0.5, 1e-15);
  for (double x = -20; x < 20; x += 0.37) {
    const double w = wrap_angle(x);
    EXPECT_GE(w, 0.0);
    EXPECT_LT(w, kTwoPi);
  }
}

TEST(Manifold, SphereDistanceExamples) {
  const Manifold s = Manifold::sphere();
  EXPECT_NEAR(geodesic_distance(s, sphere_point(0, 0), sphere_point(kPi, 0)), kPi, 1e-15);
  EXPECT_NEAR(geodesic_distance(s, sphere_point(kPi / 2, 0), sphere_point(kPi / 2, kPi / 2)), kPi / 2, 1e-15);
  // Tiny separations keep full relative accuracy.
  const double t = 1.0 + 1e-9;
  EXPECT_NEAR(geodesic_distance(s, sphere_point(1.0, 0.3), sphere_point(t, 0.3)), t - 1.0, 1e-24);
  const double f = 0.3 + 1e-9;
  EXPECT_NEAR(geodesic_distance(s, sphere_point(kPi / 2, 0.3), sphere_point(kPi / 2, f)), f - 0.3, 1e-23);
}

TEST(Manifold, TorusDistanceWraps) {
  const Manifold t = Manifold::torus();
  EXPECT_NEAR(geodesic_distance(t, torus_point(0.1, 0.1), torus_point(kTwoPi - 0.1, kTwoPi - 0.1)),
              0.2 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(geodesic_distance(t, torus_point(0, 0), torus_point(kPi, kPi)), t.diameter(), 1e-14);
}

TEST(Manifold, DistanceIsAMetric) {
  const CounterRng rng(7);
  for (const Manifold& m : kAll) {
    for (std::uint64_t i = 0; i < 200; ++i) {
      const Point a = random_point(m, rng, 3 * i), b = random_point(m, rng, 3 * i + 1), c = random_point(m, rng, 3 * i + 2);
      const double ab = geodesic_distance(m, a, b);
      EXPECT_NEAR(ab, geodesic_distance(m, b, a), 1e-14);
      EXPECT_LE(ab, m.diameter() + 1e-12);
      EXPECT_LE(ab, geodesic_distance(m, a, c) + geodesic_distance(m, c, b) + 1e-12);
      EXPECT_EQ(geodesic_distance(m, a, a), 0.0);
    }
  }
}

TEST(Manifold, ExpLogRoundTrip) {
  const CounterRng rng(11);
  for (const Manifold& m : kAll) {
    for (std::uint64_t i = 0; i < 200; ++i) {
      const Point p = random_point(m, rng, i);
      const double len = 2.5 * rng.uniform(1000 + i);
      const double ang = kTwoPi * rng.uniform(2000 + i);
      const Tangent v = m.kind == ManifoldKind::Circle ? Tangent{len, 0} : Tangent{len * std::cos(ang), len * std::sin(ang)};
      const Point q = exp_map(m, p, v);
      EXPECT_NEAR(geodesic_distance(m, p, q), len, 1e-12);
      const Tangent w = log_map(m, p, q);
      EXPECT_NEAR(w.t0, v.t0, 1e-10);
      EXPECT_NEAR(w.t1, v.t1, 1e-10);
    }
  }
}

TEST(Manifold, GeodesicInterpolateMidpoint) {
  const Manifold s = Manifold::sphere();
  const Point a = sphere_point(0.4, 1.0), b = sphere_point(1.3, 2.0);
  const Point mid = geodesic_interpolate(s, a, b, 0.5);
  const double d = geodesic_distance(s, a, b);
  EXPECT_NEAR(geodesic_distance(s, a, mid), d / 2, 1e-13);
  EXPECT_NEAR(geodesic_distance(s, mid, b), d / 2, 1e-13);
}

TEST(Quadrature, GaussLegendreExactness) {
  for (int n : {1, 2, 5, 16, 32, 128}) {
    const GaussRule g = gauss_legendre(n);
    ASSERT_EQ(g.nodes.size(), static_cast<std::size_t>(n));
    EXPECT_NEAR(std::accumulate(g.weights.begin(), g.weights.end(), 0.0), 2.0, 1e-13);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Quadrature, BallWeightsSumToVolume) {
  for (const Manifold& m : kAll) {
    for (double r : {0.05, 0.5, 1.5}) {
      const QuadratureRule q = ball_rule(m, m.kind == ManifoldKind::Sphere2 ? sphere_point(1.0, 2.0) : torus_point(1.0, 2.0), r);
      EXPECT_NEAR(q.weight_sum(), ball_volume(m, r), 1e-13 * ball_volume(m, r));
    }
  }
}

TEST(Quadrature, TorusBallSecondMoment) {
  // int_{disk} |x - p|^2 = pi r^4 / 2.
  const Manifold t = Manifold::torus();
  const Point p = torus_point(6.0, 0.2);  // ball wraps across the chart boundary
  const double r = 0.7;
  const double s = ball_rule(t, p, r).integrate([&](Point x) {
    const double d = geodesic_distance(t, p, x);
    return d * d;
  });
  EXPECT_NEAR(s, kPi * std::pow(r, 4) / 2, 1e-12);
}

TEST(Quadrature, SphereCapLinearMoment) {
  // int_{cap(c, r)} <x, c> dA = pi sin^2 r, for any center.
  const Manifold s = Manifold::sphere();
  for (const Point c : {sphere_point(0, 0), sphere_point(kPi, 0), sphere_point(0.9, 4.0)}) {
    const Vec3 cc = to_cartesian(c);
    for (double r : {0.1, 1.0, 2.5}) {
      const double v = ball_rule(s, c, r).integrate([&](Point x) { return dot(to_cartesian(x), cc); });
      EXPECT_NEAR(v, kPi * std::sin(r) * std::sin(r), 1e-12);
    }
  }
}

TEST(Quadrature, GlobalRulesIntegratePolynomials) {
  const QuadratureRule sphere = global_rule(Manifold::sphere(), 8);
  EXPECT_NEAR(sphere.weight_sum(), 4 * kPi, 1e-13);
  EXPECT_NEAR(sphere.integrate([](Point p) { const double z = std::cos(p[0]); return z * z; }), 4 * kPi / 3, 1e-13);
  EXPECT_NEAR(sphere.integrate([](Point p) { const Vec3 x = to_cartesian(p); return std::pow(x[0], 4); }), 4 * kPi / 5, 1e-12);
  const QuadratureRule torus = global_rule(Manifold::torus(), 10);
  EXPECT_NEAR(torus.integrate([](Point p) { return std::pow(std::cos(3 * p[0] + 2 * p[1]), 2); }), 2 * kPi * kPi, 1e-12);
  const QuadratureRule circle = global_rule(Manifold::circle(), 20);
  EXPECT_NEAR(circle.integrate([](Point p) { return std::pow(std::sin(7 * p[0]), 2); }), kPi, 1e-13);
}

TEST(Quadrature, InvalidOrdersThrow) {
  EXPECT_THROW(global_rule(Manifold::sphere(), 1), std::invalid_argument);
  EXPECT_THROW(ball_rule(Manifold::torus(), torus_point(0, 0), 0.1, {1, 64}), std::invalid_argument);
  EXPECT_THROW(ball_rule(Manifold::torus(), torus_point(0, 0), 4.0), std::domain_error);
}

TEST(Random, DeterministicAndInRange) {
  const CounterRng a(42), b(42), c(43);
  int differ = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(a.bits(i), b.bits(i));
    differ += a.bits(i) != c.bits(i);
    const double u = a.uniform(i);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(differ, 1000);
}

TEST(Random, NormalMoments) {
  const CounterRng rng(5);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(static_cast<std::uint64_t>(i));
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Random, SpherePointsUniformInArea) {
  // Fraction in the cap of radius 1 around the north pole: (1 - cos 1) / 2.
  const CounterRng rng(9);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += random_point(Manifold::sphere(), rng, i)[0] <= 1.0;
  EXPECT_NEAR(static_cast<double>(hits) / n, (1 - std::cos(1.0)) / 2, 0.005);
}

TEST(Sampling, CandidateCentersCover) {
  const CounterRng rng(3);
  for (const Manifold& m : kAll) {
    for (double spacing : {0.05, 0.2}) {
      for (std::uint64_t seed : {0ULL, 5ULL}) {
        const auto c = candidate_centers(m, spacing, seed);
        for (std::uint64_t i = 0; i < 2000; ++i) {
          const Point p = random_point(m, rng, i);
          double best = 1e9;
          for (const Point& q : c) best = std::min(best, geodesic_distance(m, p, q));
          ASSERT_LE(best, spacing) << to_string(m.kind);
        }
      }
    }
  }
  EXPECT_THROW(candidate_centers(Manifold::sphere(), 0.0), std::domain_error);
}

TEST(Sampling, CandidateCentersDeterministic) {
  const auto a = candidate_centers(Manifold::sphere(), 0.1, 7);
  const auto b = candidate_centers(Manifold::sphere(), 0.1, 7);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].coords, b[i].coords);
}

TEST(Sampling, SupOverBallMatchesClosedForm) {
  // |sin(x)| on the circle ball [1.2, 1.8] peaks at pi/2.
  const auto s = sup_over_ball(Manifold::circle(), circle_point(1.5), 0.3, 0.01,
                               [](Point p) { return std::abs(std::sin(p[0])); });
  EXPECT_LE(s.value, 1.0);
  EXPECT_NEAR(s.value, 1.0, 1e-9);
  EXPECT_NEAR(s.argmax[0], kPi / 2, 1e-4);
  // A maximum outside the ball is not seen: sup on the boundary.
  const auto t = sup_over_ball(Manifold::torus(), torus_point(0, 0), 0.5, 0.01,
                               [](Point p) { return std::cos(wrap_signed(p[0]) - 1.0); });
  EXPECT_NEAR(t.value, std::cos(0.5), 1e-9);
}

TEST(Sampling, SupOverManifoldFindsPeak) {
  const auto s = sup_over_manifold(Manifold::sphere(), 0.05, [](Point p) {
    const Vec3 x = to_cartesian(p);
    return x[0] + 2 * x[1] + 3 * x[2];
  });
  EXPECT_LE(s.value, std::sqrt(14.0));
  EXPECT_NEAR(s.value, std::sqrt(14.0), 1e-7);
}

TEST(Parallel, EachIndexOnceAndExceptionsPropagate) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

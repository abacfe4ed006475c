#pragma once

// Orthonormal associated Legendre functions
//
//   pbar_l^m(theta) = sqrt((2l+1)/(4pi) (l-m)!/(l+m)!) P_l^m(cos theta),
//
// without the Condon-Shortley phase, so that pbar_l^m(theta) cos(m phi)
// (times sqrt 2 for m > 0) is an L2(S^2)-orthonormal real spherical
// harmonic. Values come from the standard upward recurrence in degree,
// started from pbar_m^m ~ sin^m(theta). The sin^m factor is carried as a
// separate binary exponent so that high orders near the poles neither
// underflow prematurely nor lose the recurrence.

#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "planck/manifold.hpp"

namespace planck {

class LegendreTable {
 public:
  static constexpr int kMaxDegree = 512;

  explicit LegendreTable(int lmax) : lmax_(lmax) {
    if (lmax < 0 || lmax > kMaxDegree) {
      throw std::invalid_argument("LegendreTable: degree must lie in [0, 512]");
    }
    start_.resize(lmax + 1);
    double prod = 1.0;
    for (int m = 0; m <= lmax; ++m) {
      if (m > 0) prod *= std::sqrt((2.0 * m - 1.0) / (2.0 * m));
      start_[m] = std::sqrt((2.0 * m + 1.0) / (4.0 * kPi)) * prod;
    }
    coef_.resize(static_cast<std::size_t>(lmax + 1) * (lmax + 2) / 2);
    for (int m = 0; m <= lmax; ++m) {
      for (int l = m + 1; l <= lmax; ++l) {
        coef_[index(l, m)] =
            std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      }
    }
  }

  int max_degree() const { return lmax_; }

  /// pbar_l^m(theta) for 0 <= m <= l <= max_degree().
  double value(int l, int m, double theta) const {
    const double s = std::sin(theta), x = std::cos(theta);
    int es = 0;
    const double fs = std::frexp(s, &es);
    if (m > 0 && s == 0.0) return 0.0;
    const double mant = start_[m] * (m > 0 ? std::pow(fs, m) : 1.0);
    return std::ldexp(upward(l, m, x, mant), es * m);
  }

  /// pbar_l^m(theta) for m = 0..l into out[0..l].
  void row(int l, double theta, std::span<double> out) const {
    const double s = std::sin(theta), x = std::cos(theta);
    int es = 0;
    const double fs = std::frexp(s, &es);
    double mant_pow = 1.0;  // fs^m, renormalized
    long exp_pow = 0;       // binary exponent of s^m beyond mant_pow
    for (int m = 0; m <= l; ++m) {
      if (m > 0) {
        if (s == 0.0) {
          out[m] = 0.0;
          continue;
        }
        mant_pow *= fs;
        exp_pow += es;
        int e = 0;
        mant_pow = std::frexp(mant_pow, &e);
        exp_pow += e;
      }
      const double v = upward(l, m, x, start_[m] * mant_pow);
      out[m] = std::ldexp(v, static_cast<int>(std::max(-100000L, exp_pow)));
    }
  }

 private:
  std::size_t index(int l, int m) const {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + static_cast<std::size_t>(m);
  }

  double upward(int l, int m, double x, double pmm) const {
    if (l == m) return pmm;
    double p0 = pmm;
    double p1 = x * coef_[index(m + 1, m)] * pmm;
    for (int ll = m + 2; ll <= l; ++ll) {
      const double p2 = coef_[index(ll, m)] * (x * p1 - p0 / coef_[index(ll - 1, m)]);
      p0 = p1;
      p1 = p2;
    }
    return p1;
  }

  int lmax_;
  std::vector<double> start_;
  std::vector<double> coef_;
};

}  // namespace planck

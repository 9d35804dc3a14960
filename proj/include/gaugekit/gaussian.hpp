#pragma once

#include <array>
#include <cmath>

#include "gaugekit/grid.hpp"

namespace gaugekit {

/// One-dimensional normalized Gaussian and its first two derivatives.
struct Gauss1 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline Gauss1 gauss1(double x, double sigma) {
  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * sigma);
  const double v = norm * std::exp(-0.5 * x * x / (sigma * sigma));
  const double s2 = sigma * sigma;
  return {v, -x / s2 * v, (x * x / s2 - 1.0) / s2 * v};
}

/// Periodic 1-D Gaussian from the three nearest images of `x` (any real x).
inline Gauss1 periodic_gauss1(double x, double sigma, double length) {
  x -= length * std::floor(x / length + 0.5);
  Gauss1 sum;
  for (int image = -1; image <= 1; ++image) {
    const Gauss1 g = gauss1(x + image * length, sigma);
    sum.value += g.value;
    sum.d1 += g.d1;
    sum.d2 += g.d2;
  }
  return sum;
}

/// Separable 3-D Gaussian with value, gradient and Hessian.
struct Gauss3 {
  double value = 0.0;
  Vec3 gradient;
  std::array<std::array<double, 3>, 3> hessian{};
};

inline Gauss3 combine(const std::array<Gauss1, 3>& g) {
  Gauss3 out;
  out.value = g[0].value * g[1].value * g[2].value;
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t b = (a + 1) % 3, c = (a + 2) % 3;
    out.gradient[a] = g[a].d1 * g[b].value * g[c].value;
    out.hessian[a][a] = g[a].d2 * g[b].value * g[c].value;
    out.hessian[a][b] = out.hessian[b][a] = g[a].d1 * g[b].d1 * g[c].value;
  }
  return out;
}

/// Free-space Gaussian of width sigma at displacement d.
inline Gauss3 gauss3(const Vec3& d, double sigma) {
  return combine({gauss1(d.x, sigma), gauss1(d.y, sigma), gauss1(d.z, sigma)});
}

/// Periodic Gaussian (3^3 image sum) at displacement d on a box of side length.
inline Gauss3 periodic_gauss3(const Vec3& d, double sigma, double length) {
  return combine({periodic_gauss1(d.x, sigma, length), periodic_gauss1(d.y, sigma, length),
                  periodic_gauss1(d.z, sigma, length)});
}

}  // namespace gaugekit

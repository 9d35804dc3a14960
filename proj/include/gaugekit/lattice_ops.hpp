#pragma once

#include <algorithm>
#include <cmath>

#include "gaugekit/field.hpp"

namespace gaugekit {

namespace detail {

inline const Complex kI{0.0, 1.0};

// Applies out_a(k) = fn(kappa, in(k)) for a vector field, component-wise spectra.
template <typename Fn>
VectorField map_vector_spectrum(const VectorField& f, Fn&& fn) {
  const Grid& g = f.grid();
  const Spectrum& fx = f[0].spectrum();
  const Spectrum& fy = f[1].spectrum();
  const Spectrum& fz = f[2].spectrum();
  std::array<Spectrum, 3> out{Spectrum(g.spectral_sites()), Spectrum(g.spectral_sites()), Spectrum(g.spectral_sites())};
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    const std::array<Complex, 3> v = fn(kap, std::array<Complex, 3>{fx[idx], fy[idx], fz[idx]});
    for (std::size_t a = 0; a < 3; ++a) out[a][idx] = v[a];
  });
  return VectorField(ScalarField::from_spectrum(g, out[0]), ScalarField::from_spectrum(g, out[1]),
                     ScalarField::from_spectrum(g, out[2]));
}

}  // namespace detail

/// Spectral gradient.
inline VectorField grad(const ScalarField& f) {
  const Grid& g = f.grid();
  const Spectrum& s = f.spectrum();
  std::array<Spectrum, 3> out{Spectrum(g.spectral_sites()), Spectrum(g.spectral_sites()), Spectrum(g.spectral_sites())};
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    for (std::size_t a = 0; a < 3; ++a) out[a][idx] = detail::kI * kap[a] * s[idx];
  });
  return VectorField(ScalarField::from_spectrum(g, out[0]), ScalarField::from_spectrum(g, out[1]),
                     ScalarField::from_spectrum(g, out[2]));
}

/// Spectral divergence.
inline ScalarField div(const VectorField& f) {
  const Grid& g = f.grid();
  const Spectrum& fx = f[0].spectrum();
  const Spectrum& fy = f[1].spectrum();
  const Spectrum& fz = f[2].spectrum();
  Spectrum out(g.spectral_sites());
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    out[idx] = detail::kI * (kap.x * fx[idx] + kap.y * fy[idx] + kap.z * fz[idx]);
  });
  return ScalarField::from_spectrum(g, out);
}

/// Spectral curl.
inline VectorField curl(const VectorField& f) {
  return detail::map_vector_spectrum(f, [](const Vec3& k, const std::array<Complex, 3>& v) {
    return std::array<Complex, 3>{detail::kI * (k.y * v[2] - k.z * v[1]), detail::kI * (k.z * v[0] - k.x * v[2]),
                                  detail::kI * (k.x * v[1] - k.y * v[0])};
  });
}

/// Spectral Laplacian, -|kappa|^2 f.
inline ScalarField laplacian(const ScalarField& f) {
  const Grid& g = f.grid();
  const Spectrum& s = f.spectrum();
  Spectrum out(g.spectral_sites());
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) { out[idx] = -dot(kap, kap) * s[idx]; });
  return ScalarField::from_spectrum(g, out);
}

/// Longitudinal projection kappa (kappa . F) / |kappa|^2; modes with kappa = 0 map to zero.
inline VectorField longitudinal_part(const VectorField& f) {
  return detail::map_vector_spectrum(f, [](const Vec3& k, const std::array<Complex, 3>& v) {
    const double k2 = dot(k, k);
    if (k2 == 0.0) return std::array<Complex, 3>{};
    const Complex kv = (k.x * v[0] + k.y * v[1] + k.z * v[2]) / k2;
    return std::array<Complex, 3>{k.x * kv, k.y * kv, k.z * kv};
  });
}

/// F - longitudinal_part(F); the zero mode and kappa = 0 modes stay here.
inline VectorField transverse_part(const VectorField& f) { return f - longitudinal_part(f); }

struct HelmholtzParts {
  VectorField transverse;
  VectorField longitudinal;
};

inline HelmholtzParts helmholtz_decompose(const VectorField& f) {
  VectorField l = longitudinal_part(f);
  VectorField t = f - l;
  return {std::move(t), std::move(l)};
}

/// h^3 times the site sum.
inline double volume_integral(const ScalarField& f) {
  double sum = 0.0;
  for (double v : f.values()) sum += v;
  return sum * f.grid().cell_volume();
}

/// h^3 times the sum over sites whose periodic distance to the center is at most the radius.
inline double region_integral(const ScalarField& f, const Ball& region) {
  const Grid& g = f.grid();
  if (!(region.radius >= 0.0) || 2.0 * region.radius > g.length()) {
    throw Error(ErrorCode::InvalidArgument, "region does not fit in the box");
  }
  const double r2 = region.radius * region.radius;
  double sum = 0.0;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const Vec3 d = g.min_image(region.center, g.position(s));
    if (dot(d, d) <= r2) sum += f[s];
  }
  return sum * g.cell_volume();
}

/// Sites belonging to a ball region (same membership rule as region_integral).
inline std::vector<std::size_t> region_sites(const Grid& g, const Ball& region) {
  std::vector<std::size_t> sites;
  const double r2 = region.radius * region.radius;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const Vec3 d = g.min_image(region.center, g.position(s));
    if (dot(d, d) <= r2) sites.push_back(s);
  }
  return sites;
}

/// Integral of f g over the box.
inline double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid());
  double sum = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) sum += f[s] * g[s];
  return sum * f.grid().cell_volume();
}

/// Integral of F . G over the box.
inline double inner(const VectorField& f, const VectorField& g) {
  return inner(f[0], g[0]) + inner(f[1], g[1]) + inner(f[2], g[2]);
}

/// Continuum-normalized L2 norm, sqrt(integral f^2).
inline double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }
inline double l2_norm(const VectorField& f) { return std::sqrt(inner(f, f)); }

inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_norm(const VectorField& f) {
  double m = 0.0;
  for (std::size_t s = 0; s < f.size(); ++s) m = std::max(m, norm(f.at(s)));
  return m;
}

/// Integral of f^2 evaluated from the spectrum (Parseval), weight h^3 / N^3 per full-spectrum mode.
inline double spectral_power(const ScalarField& f) {
  const Grid& g = f.grid();
  const Spectrum& s = f.spectrum();
  double sum = 0.0;
  for_each_mode(g, [&](std::size_t idx, const Vec3&, const Vec3&, double w) { sum += w * std::norm(s[idx]); });
  return sum * g.cell_volume() / static_cast<double>(g.sites());
}

/// ||F_L|| / ||F||; zero for the zero field.
inline double transversality_defect(const VectorField& f) {
  const double total = l2_norm(f);
  if (total == 0.0) return 0.0;
  return l2_norm(longitudinal_part(f)) / total;
}

constexpr double kTransverseTolerance = 1e-10;

inline void require_transverse(const VectorField& f, const char* what) {
  const double defect = transversality_defect(f);
  if (defect > kTransverseTolerance) {
    throw Error(ErrorCode::NonTransverseInput,
                std::string(what) + " has relative longitudinal part " + std::to_string(defect));
  }
}

}  // namespace gaugekit

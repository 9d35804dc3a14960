#pragma once

#include <cmath>
#include <string>

#include "gaugekit/lattice_ops.hpp"

namespace gaugekit {

constexpr double kNeutralityTolerance = 1e-10;

/// Throws NonNeutralSource unless |integral rho| <= 1e-10 integral |rho|.
inline void require_neutral(const ScalarField& rho) {
  double net = 0.0, total = 0.0;
  for (double v : rho.values()) {
    net += v;
    total += std::abs(v);
  }
  if (std::abs(net) > kNeutralityTolerance * total) {
    throw Error(ErrorCode::NonNeutralSource,
                "net charge " + std::to_string(net * rho.grid().cell_volume()) + " is not zero");
  }
}

/// Periodic Coulomb potential: -lap V = rho spectrally, V has no content where kappa = 0.
inline ScalarField coulomb_potential(const ScalarField& rho) {
  require_neutral(rho);
  const Grid& g = rho.grid();
  const Spectrum& s = rho.spectrum();
  Spectrum out(g.spectral_sites());
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    const double k2 = dot(kap, kap);
    out[idx] = k2 > 0.0 ? s[idx] / k2 : Complex{};
  });
  return ScalarField::from_spectrum(g, out);
}

/// Drops the Fourier content that no divergence can produce (kappa = 0 modes).
inline ScalarField divergence_range(const ScalarField& rho) {
  const Grid& g = rho.grid();
  const Spectrum& s = rho.spectrum();
  Spectrum out(g.spectral_sites());
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    out[idx] = dot(kap, kap) > 0.0 ? s[idx] : Complex{};
  });
  return ScalarField::from_spectrum(g, out);
}

}  // namespace gaugekit

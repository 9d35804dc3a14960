#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "gaugekit/gauge_kernels.hpp"

namespace gaugekit {

/// phi = V + chi_g[E_T].
inline ScalarField scalar_potential(const GaugeKernel& kernel, const ScalarField& rho, const VectorField& e_t) {
  require_same_grid(rho.grid(), e_t.grid());
  ScalarField v = coulomb_potential(rho);
  if (std::holds_alternative<CoulombKernel>(kernel)) {
    require_transverse(e_t, "E_T");
    return v;
  }
  return v + chi_functional(kernel, e_t);
}

/// Canonical (gauge-dependent) and gauge-invariant energy terms for one field state.
struct EnergyPartition {
  double h_pi_sq = 0.0;     // 1/2 int Pi_T^2
  double h_cross = 0.0;     // int Pi_T . P_T
  double h_pt_sq = 0.0;     // 1/2 int P_T^2
  double h_long = 0.0;      // 1/2 int P_L^2
  double h_mag = 0.0;       // 1/2 int B^2
  double h_total_em = 0.0;  // 1/2 int (E^2 + B^2)
  double h_et_sq = 0.0;     // 1/2 int E_T^2, for the identities
};

/// Pi_T = -(E_T + P_T), with P_T from the kernel and P_L = grad V.
inline EnergyPartition canonical_partition(const GaugeKernel& kernel, const VectorField& e, const VectorField& b,
                                           const ScalarField& rho) {
  require_same_grid(e.grid(), b.grid());
  require_same_grid(e.grid(), rho.grid());
  const auto [e_t, e_l] = helmholtz_decompose(e);
  const VectorField p_t = transverse_polarization(kernel, rho);
  const VectorField p_l = longitudinal_polarization(rho);
  const VectorField pi_t = -1.0 * (e_t + p_t);
  EnergyPartition out;
  out.h_pi_sq = 0.5 * inner(pi_t, pi_t);
  out.h_cross = inner(pi_t, p_t);
  out.h_pt_sq = 0.5 * inner(p_t, p_t);
  out.h_long = 0.5 * inner(p_l, p_l);
  out.h_mag = 0.5 * inner(b, b);
  out.h_total_em = 0.5 * (inner(e, e) + inner(b, b));
  out.h_et_sq = 0.5 * inner(e_t, e_t);
  return out;
}

/// Classical normal variables a_lambda(k) of a transverse (A_T, Pi_T) pair.
///
/// Amplitudes cover every lattice wavevector with kappa != 0 in the full
/// spectrum (flat index i + N(j + N l), FFT ordering). Fourier coefficients use
/// the continuum normalization h^3 sum f exp(-ikx), so the mode measure is 1/L^3.
/// Content at kappa = 0 (uniform and pure-Nyquist modes) is not a mode; it is
/// kept verbatim so reconstruction is exact.
struct ModeSet {
  Grid grid;
  std::vector<std::array<Complex, 2>> amplitude;  // per full-spectrum index
  std::vector<double> omega;                       // |kappa|, 0 where not a mode
  std::array<Spectrum, 3> rest_a;                  // half-spectrum A at kappa = 0
  std::array<Spectrum, 3> rest_pi;

  /// Mode measure times sum of omega |a|^2.
  double energy() const {
    double sum = 0.0;
    for (std::size_t m = 0; m < amplitude.size(); ++m) {
      sum += omega[m] * (std::norm(amplitude[m][0]) + std::norm(amplitude[m][1]));
    }
    return sum / grid.volume();
  }

  /// Helicity amplitudes (a_1 -/+ i a_2)/sqrt(2) for the (+, -) pair.
  std::array<Complex, 2> helicity(std::size_t m) const {
    const Complex i{0.0, 1.0};
    const auto& a = amplitude[m];
    return {(a[0] - i * a[1]) / std::sqrt(2.0), (a[0] + i * a[1]) / std::sqrt(2.0)};
  }

  std::size_t index(int kx, int ky, int kz) const {
    const int n = grid.n();
    return static_cast<std::size_t>(grid.wrap(kx) + n * (grid.wrap(ky) + n * grid.wrap(kz)));
  }
};

/// Deterministic polarization basis: e1 from the axis after the largest |kappa|
/// component, orthogonalized against k; e2 = khat x e1. Under k -> -k, e1 is
/// unchanged and e2 flips sign.
inline std::array<Vec3, 2> polarization_basis(const Vec3& kappa) {
  const double kn = norm(kappa);
  const Vec3 khat = kappa / kn;
  std::size_t a = 0;
  for (std::size_t c = 1; c < 3; ++c) {
    if (std::abs(kappa[c]) > std::abs(kappa[a])) a = c;
  }
  Vec3 e1;
  e1[(a + 1) % 3] = 1.0;
  e1 -= khat * dot(khat, e1);
  e1 = e1 / norm(e1);
  return {e1, cross(khat, e1)};
}

namespace detail {

// Full-spectrum coefficient from a half spectrum via Hermitian symmetry.
inline Complex full_coefficient(const Grid& g, const Spectrum& s, int kx, int ky, int kz) {
  const int n = g.n();
  const int nh = n / 2 + 1;
  if (kx < nh) return s[static_cast<std::size_t>(kx + nh * (ky + n * kz))];
  const int mx = (n - kx) % n, my = (n - ky) % n, mz = (n - kz) % n;
  return std::conj(s[static_cast<std::size_t>(mx + nh * (my + n * mz))]);
}

inline Vec3 kappa_of(const Grid& g, int kx, int ky, int kz) { return {g.kappa(kx), g.kappa(ky), g.kappa(kz)}; }

}  // namespace detail

/// a_lambda(k) = (omega A_lambda(k) + i Pi_lambda(k)) / sqrt(2 omega), omega = |kappa|.
inline ModeSet mode_amplitudes(const VectorField& a_t, const VectorField& pi_t) {
  require_same_grid(a_t.grid(), pi_t.grid());
  require_transverse(a_t, "A_T");
  require_transverse(pi_t, "Pi_T");
  const Grid& g = a_t.grid();
  const int n = g.n();
  const double cell = g.cell_volume();
  ModeSet out{g, std::vector<std::array<Complex, 2>>(g.sites()), std::vector<double>(g.sites(), 0.0), {}, {}};
  std::array<const Spectrum*, 3> sa{&a_t[0].spectrum(), &a_t[1].spectrum(), &a_t[2].spectrum()};
  std::array<const Spectrum*, 3> sp{&pi_t[0].spectrum(), &pi_t[1].spectrum(), &pi_t[2].spectrum()};
  for (std::size_t c = 0; c < 3; ++c) {
    out.rest_a[c].assign(g.spectral_sites(), Complex{});
    out.rest_pi[c].assign(g.spectral_sites(), Complex{});
  }
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    if (dot(kap, kap) == 0.0) {
      for (std::size_t c = 0; c < 3; ++c) {
        out.rest_a[c][idx] = (*sa[c])[idx];
        out.rest_pi[c][idx] = (*sp[c])[idx];
      }
    }
  });
  const Complex i{0.0, 1.0};
  for (int kz = 0; kz < n; ++kz) {
    for (int ky = 0; ky < n; ++ky) {
      for (int kx = 0; kx < n; ++kx) {
        const Vec3 kap = detail::kappa_of(g, kx, ky, kz);
        const double w = norm(kap);
        if (w == 0.0) continue;
        const auto basis = polarization_basis(kap);
        std::array<Complex, 3> av, pv;
        for (std::size_t c = 0; c < 3; ++c) {
          av[c] = cell * detail::full_coefficient(g, *sa[c], kx, ky, kz);
          pv[c] = cell * detail::full_coefficient(g, *sp[c], kx, ky, kz);
        }
        const std::size_t m = out.index(kx, ky, kz);
        out.omega[m] = w;
        for (std::size_t l = 0; l < 2; ++l) {
          const Vec3& e = basis[l];
          const Complex al = e.x * av[0] + e.y * av[1] + e.z * av[2];
          const Complex pl = e.x * pv[0] + e.y * pv[1] + e.z * pv[2];
          out.amplitude[m][l] = (w * al + i * pl) / std::sqrt(2.0 * w);
        }
      }
    }
  }
  return out;
}

struct TransversePair {
  VectorField a_t;
  VectorField pi_t;
};

/// Inverse of mode_amplitudes.
inline TransversePair reconstruct(const ModeSet& modes) {
  const Grid& g = modes.grid;
  const int n = g.n();
  const double inv_cell = 1.0 / g.cell_volume();
  std::array<Spectrum, 3> sa = modes.rest_a, sp = modes.rest_pi;
  const Complex i{0.0, 1.0};
  for_each_mode(g, [&](std::size_t idx, const Vec3& kap, const Vec3&, double) {
    const double w = norm(kap);
    if (w == 0.0) return;
    const int kx = static_cast<int>(idx % (n / 2 + 1));
    const int ky = static_cast<int>((idx / (n / 2 + 1)) % n);
    const int kz = static_cast<int>(idx / ((n / 2 + 1) * n));
    const auto& a = modes.amplitude[modes.index(kx, ky, kz)];
    const auto& b = modes.amplitude[modes.index(-kx, -ky, -kz)];
    const auto basis = polarization_basis(kap);
    const std::array<double, 2> parity{1.0, -1.0};
    std::array<Complex, 3> av{}, pv{};
    for (std::size_t l = 0; l < 2; ++l) {
      const Complex al = (a[l] + parity[l] * std::conj(b[l])) / std::sqrt(2.0 * w);
      const Complex pl = std::sqrt(2.0 * w) * (a[l] - parity[l] * std::conj(b[l])) / (2.0 * i);
      for (std::size_t c = 0; c < 3; ++c) {
        av[c] += basis[l][c] * al;
        pv[c] += basis[l][c] * pl;
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      sa[c][idx] = av[c] * inv_cell;
      sp[c][idx] = pv[c] * inv_cell;
    }
  });
  VectorField a_t(ScalarField::from_spectrum(g, sa[0]), ScalarField::from_spectrum(g, sa[1]),
                  ScalarField::from_spectrum(g, sa[2]));
  VectorField pi_t(ScalarField::from_spectrum(g, sp[0]), ScalarField::from_spectrum(g, sp[1]),
                   ScalarField::from_spectrum(g, sp[2]));
  return {std::move(a_t), std::move(pi_t)};
}

/// 1/2 int (Pi_T^2 + (curl A_T)^2), the free-field energy in real space.
inline double free_field_energy(const VectorField& a_t, const VectorField& pi_t) {
  const VectorField b = curl(a_t);
  return 0.5 * (inner(pi_t, pi_t) + inner(b, b));
}

}  // namespace gaugekit

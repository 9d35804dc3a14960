#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gaugekit/potentials_energy.hpp"

using namespace gaugekit;

namespace {

PoincareKernel centered(const Grid& g) {
  PoincareKernel k;
  k.origin = {0.5 * g.length(), 0.5 * g.length(), 0.5 * g.length()};
  return k;
}

ScalarField dipole_rho(const Grid& g) {
  const Vec3 c = centered(g).origin;
  const double h = g.spacing();
  return charge_density(g, {{{1.0, c + Vec3{2 * h, h, 0}}, {-1.0, c + Vec3{-2 * h, h, 0}}}, 1.5 * h});
}

// Travelling wave along x on mode m with polarization e (complex): A = Re(e a exp(i k x)), Pi = dA/dt.
TransversePair travelling_wave(const Grid& g, int m, const std::array<Complex, 3>& e, double amp) {
  const double k = 2.0 * M_PI * m / g.length();
  const Complex i{0.0, 1.0};
  auto a = VectorField::from_function(g, [&](const Vec3& x) {
    const Complex ph = amp * std::exp(i * k * x.x);
    return Vec3{std::real(e[0] * ph), std::real(e[1] * ph), std::real(e[2] * ph)};
  });
  auto pi = VectorField::from_function(g, [&](const Vec3& x) {
    const Complex ph = -i * k * amp * std::exp(i * k * x.x);
    return Vec3{std::real(e[0] * ph), std::real(e[1] * ph), std::real(e[2] * ph)};
  });
  return {std::move(a), std::move(pi)};
}

std::size_t nonzero_count(const ModeSet& m, bool helicity, double tol) {
  std::size_t count = 0;
  for (std::size_t s = 0; s < m.amplitude.size(); ++s) {
    const auto a = helicity ? m.helicity(s) : m.amplitude[s];
    for (const Complex& c : a) count += std::abs(c) > tol;
  }
  return count;
}

}  // namespace

TEST(CoulombPotential, ZeroAndSingleMode) {
  const Grid g(16, 3.0);
  EXPECT_EQ(max_abs(coulomb_potential(ScalarField(g))), 0.0);
  const double l = g.length();
  const auto rho = ScalarField::from_function(g, [&](const Vec3& x) { return std::cos(2 * M_PI * x.x / l); });
  const auto expected = ScalarField::from_function(
      g, [&](const Vec3& x) { return std::pow(l / (2 * M_PI), 2) * std::cos(2 * M_PI * x.x / l); });
  EXPECT_LT(max_abs(coulomb_potential(rho) - expected), 1e-12);
}

TEST(CoulombPotential, ChargedInputRejected) {
  const Grid g(8, 1.0);
  const auto rho = ScalarField::from_function(g, [](const Vec3& x) { return 1.0 + std::cos(2 * M_PI * x.x); });
  try {
    (void)coulomb_potential(rho);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonNeutralSource);
  }
}

TEST(ScalarPotential, CoulombAndStaticCasesReduceToV) {
  const Grid g(32, 32.0);
  const ScalarField rho = dipole_rho(g);
  const ScalarField v = coulomb_potential(rho);
  const VectorField e_t = random_transverse_field(g, 1);
  EXPECT_EQ(max_abs(scalar_potential(CoulombKernel{}, rho, e_t) - v), 0.0);
  EXPECT_EQ(max_abs(scalar_potential(centered(g), rho, VectorField(g)) - v), 0.0);
}

TEST(ScalarPotential, PoincarePlaneWaveMatchesQuadratureOracle) {
  const Grid g(32, 4.0);
  const double l = g.length(), amp = 0.3;
  const auto e_t = VectorField::from_function(g, [&](const Vec3& x) { return Vec3{0.0, 0.0, amp * std::sin(2 * M_PI * x.y / l)}; });
  const PoincareKernel k = centered(g);
  const ScalarField phi = scalar_potential(k, ScalarField(g), e_t);
  double worst = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const Vec3 d = g.min_image(k.origin, g.position(s));
    if (norm(d) > 0.15 * l) continue;
    auto f = [&](double lam) { return d.z * amp * std::sin(2 * M_PI * (k.origin.y + lam * d.y) / l); };
    const double oracle = -boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 10, 1e-14);
    worst = std::max(worst, std::abs(phi[s] - oracle));
    scale = std::max(scale, std::abs(oracle));
  }
  EXPECT_LT(worst, 1e-10 * scale);
}

TEST(CanonicalPartition, CoulombHasNoTransversePolarization) {
  const Grid g(32, 32.0);
  const ScalarField rho = dipole_rho(g);
  const VectorField e = random_transverse_field(g, 2) - grad(coulomb_potential(rho));
  const VectorField b = curl(random_transverse_field(g, 3));
  const EnergyPartition p = canonical_partition(CoulombKernel{}, e, b, rho);
  EXPECT_EQ(p.h_cross, 0.0);
  EXPECT_EQ(p.h_pt_sq, 0.0);
  EXPECT_NEAR(p.h_pi_sq, p.h_et_sq, 1e-12 * p.h_et_sq);
}

TEST(CanonicalPartition, ChargeFreeStateIsKernelIndependent) {
  const Grid g(32, 32.0);
  const VectorField e = random_transverse_field(g, 4);
  const VectorField b = curl(random_transverse_field(g, 5));
  const EnergyPartition c = canonical_partition(CoulombKernel{}, e, b, ScalarField(g));
  const EnergyPartition p = canonical_partition(centered(g), e, b, ScalarField(g));
  EXPECT_EQ(c.h_pi_sq, p.h_pi_sq);
  EXPECT_EQ(p.h_cross, 0.0);
  EXPECT_EQ(c.h_total_em, p.h_total_em);
}

TEST(CanonicalPartition, DipolePlusWaveGaugeDependence) {
  const Grid g(32, 32.0);
  const ScalarField rho = dipole_rho(g);
  const TransversePair w = travelling_wave(g, 2, {0.0, 0.0, 1.0}, 0.05);
  const VectorField e = (-1.0) * w.pi_t - grad(coulomb_potential(rho));
  const VectorField b = curl(w.a_t);
  const EnergyPartition c = canonical_partition(CoulombKernel{}, e, b, rho);
  const EnergyPartition p = canonical_partition(centered(g), e, b, rho);
  EXPECT_LT(std::abs(c.h_total_em - p.h_total_em), 1e-12 * c.h_total_em);
  EXPECT_GT(std::abs(c.h_pi_sq - p.h_pi_sq) / c.h_total_em, 1e-6);
  for (const auto& x : {c, p}) {
    EXPECT_LT(std::abs(x.h_pi_sq + x.h_cross + x.h_pt_sq - x.h_et_sq), 1e-10 * x.h_et_sq);
    EXPECT_LT(std::abs(x.h_et_sq + x.h_long + x.h_mag - x.h_total_em), 1e-10 * x.h_total_em);
  }
}

TEST(ModeAmplitudes, ZeroFields) {
  const Grid g(8, 1.0);
  const ModeSet m = mode_amplitudes(VectorField(g), VectorField(g));
  EXPECT_EQ(nonzero_count(m, false, 0.0), 0u);
}

TEST(ModeAmplitudes, LongitudinalInputRejected) {
  const Grid g(8, 1.0);
  try {
    (void)mode_amplitudes(grad(random_neutral_scalar(g, 1)), VectorField(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonTransverseInput);
  }
}

TEST(ModeAmplitudes, SingleWaveOccupiesOneMode) {
  const Grid g(16, 2.0);
  const Vec3 kap{2 * M_PI * 3 / g.length(), 0.0, 0.0};
  const auto basis = polarization_basis(kap);
  EXPECT_NEAR(dot(basis[0], kap), 0.0, 1e-15);
  EXPECT_NEAR(dot(basis[0], basis[1]), 0.0, 1e-15);
  EXPECT_NEAR(norm(basis[1]), 1.0, 1e-15);
  const Complex i{0.0, 1.0};
  // Circular: one helicity amplitude in the whole set.
  std::array<Complex, 3> circ{};
  for (std::size_t c = 0; c < 3; ++c) circ[c] = (basis[0][c] + i * basis[1][c]) / std::sqrt(2.0);
  const TransversePair cw = travelling_wave(g, 3, circ, 0.4);
  const ModeSet mc = mode_amplitudes(cw.a_t, cw.pi_t);
  EXPECT_EQ(nonzero_count(mc, true, 1e-10 * std::sqrt(mc.energy() * g.volume())), 1u);
  // Linear along e1: one (k, lambda) amplitude.
  const TransversePair lw = travelling_wave(g, 3, {basis[0].x, basis[0].y, basis[0].z}, 0.4);
  const ModeSet ml = mode_amplitudes(lw.a_t, lw.pi_t);
  EXPECT_EQ(nonzero_count(ml, false, 1e-10 * std::sqrt(ml.energy() * g.volume())), 1u);
  EXPECT_GT(std::abs(ml.amplitude[ml.index(3, 0, 0)][0]), 0.0);
}

TEST(ModeAmplitudes, ParsevalEnergyAndRoundTrip) {
  const Grid g(16, 1.3);
  const VectorField a = random_transverse_field(g, 6, 1.0);
  const VectorField pi = random_transverse_field(g, 7, 1.0);
  const ModeSet m = mode_amplitudes(a, pi);
  const double real_space = free_field_energy(a, pi);
  EXPECT_LT(std::abs(m.energy() - real_space), 1e-12 * real_space);
  const TransversePair back = reconstruct(m);
  EXPECT_LT(max_norm(back.a_t - a), 1e-12 * max_norm(a));
  EXPECT_LT(max_norm(back.pi_t - pi), 1e-12 * max_norm(pi));
}

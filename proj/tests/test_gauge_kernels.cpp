#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gaugekit/gauge_kernels.hpp"

using namespace gaugekit;

namespace {

ChargeEnsemble dipole(const Grid& g) {
  const Vec3 c{0.5 * g.length(), 0.5 * g.length(), 0.5 * g.length()};
  const double h = g.spacing();
  return {{{1.0, c + Vec3{2 * h, h, 0.5 * h}}, {-1.0, c + Vec3{-2 * h, h, 0.5 * h}}}, 1.5 * h};
}

PoincareKernel centered_poincare(const Grid& g, int order = 32) {
  PoincareKernel k;
  k.origin = {0.5 * g.length(), 0.5 * g.length(), 0.5 * g.length()};
  k.quadrature_order = order;
  return k;
}

}  // namespace

TEST(ChiFunctional, CoulombIsZero) {
  const Grid g(16, 1.0);
  const VectorField a = random_transverse_field(g, 1);
  EXPECT_EQ(max_abs(chi_functional(CoulombKernel{}, a)), 0.0);
}

TEST(ChiFunctional, PoincareRejectsZeroModeAndLongitudinalInput) {
  const Grid g(16, 1.0);
  const auto uniform = VectorField::from_function(g, [](const Vec3&) { return Vec3{0.0, 1.0, 0.0}; });
  try {
    (void)chi_functional(centered_poincare(g), uniform);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PoincareZeroModePresent);
  }
  const VectorField l = grad(random_neutral_scalar(g, 2));
  try {
    (void)chi_functional(centered_poincare(g), l);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonTransverseInput);
  }
}

// Independent 1-D adaptive quadrature of -int_0^1 d . A(x0 + lambda d) dlambda.
TEST(ChiFunctional, PoincareMatchesAdaptiveLineIntegral) {
  const Grid g(32, 2.0);
  const double l = g.length(), amp = 0.7;
  const auto a = VectorField::from_function(g, [&](const Vec3& x) { return Vec3{0.0, amp * std::cos(2 * M_PI * x.x / l), 0.0}; });
  const PoincareKernel k = centered_poincare(g);
  const ScalarField chi = chi_functional(k, a);
  double worst = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const Vec3 d = g.min_image(k.origin, g.position(s));
    if (norm(d) > 0.15 * l) continue;
    auto f = [&](double lam) { return d.y * amp * std::cos(2 * M_PI * (k.origin.x + lam * d.x) / l); };
    const double oracle = -boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 10, 1e-14);
    worst = std::max(worst, std::abs(chi[s] - oracle));
    scale = std::max(scale, std::abs(oracle));
  }
  EXPECT_GT(scale, 0.1);
  EXPECT_LT(worst, 1e-10 * scale);
}

TEST(ChiFunctional, LinearInTheField) {
  const Grid g(16, 1.0);
  const VectorField f = random_transverse_field(g, 3), h = random_transverse_field(g, 4);
  const PoincareKernel k = centered_poincare(g, 8);
  const ScalarField lhs = chi_functional(k, 2.0 * f + (-0.5) * h);
  const ScalarField rhs = 2.0 * chi_functional(k, f) + (-0.5) * chi_functional(k, h);
  EXPECT_LT(max_abs(lhs - rhs), 1e-12 * max_abs(rhs));
}

TEST(Polarization, CoulombDipoleSatisfiesGauss) {
  const Grid g(32, 32.0);
  const ScalarField rho = charge_density(g, dipole(g));
  EXPECT_EQ(max_norm(transverse_polarization(CoulombKernel{}, rho)), 0.0);
  const VectorField p = polarization(CoulombKernel{}, rho);
  EXPECT_LT(l2_norm(div(p) + rho) / l2_norm(rho), 1e-10);
}

TEST(Polarization, PoincareDipoleSatisfiesGaussAndDiffersFromCoulomb) {
  const Grid g(32, 32.0);
  const ScalarField rho = charge_density(g, dipole(g));
  const PoincareKernel k = centered_poincare(g);
  const VectorField p = polarization(k, rho);
  EXPECT_LT(l2_norm(div(p) + rho) / l2_norm(rho), 1e-10);
  EXPECT_LT(std::abs(volume_integral(rho + div(p))), 1e-8 * l2_norm(rho));
  EXPECT_GT(l2_norm(transverse_polarization(k, rho)), 1e-3 * l2_norm(p));
}

TEST(Polarization, NonNeutralEnsembleRejected) {
  const Grid g(16, 1.0);
  ChargeEnsemble e{{{1.0, {0.5, 0.5, 0.5}}}, 0.0};
  try {
    (void)polarization(CoulombKernel{}, g, e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NonNeutralSource);
  }
}

TEST(Polarization, AdjointIdentityForEachKernel) {
  const Grid g(16, 1.0);
  const auto custom = KernelRegistry::instance().get("gaussian-shift");
  for (const GaugeKernel& k : std::vector<GaugeKernel>{CoulombKernel{}, centered_poincare(g), custom}) {
    const AdjointCheck c = check_adjoint(k, g, 11);
    EXPECT_TRUE(c.passed) << describe(k) << " " << c.relative_error;
    EXPECT_LT(c.relative_error, 1e-8);
  }
  PoincareKernel lin = centered_poincare(g, 16);
  lin.interpolation = Interpolation::Linear;
  EXPECT_LT(check_adjoint(lin, g, 12).relative_error, 1e-8);
}

TEST(KernelRegistry, MismatchedAdjointIsRejected) {
  try {
    (void)KernelRegistry::instance().get("mismatched-adjoint");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KernelRegistration);
  }
  EXPECT_THROW((void)KernelRegistry::instance().get("no-such-kernel"), Error);
}

TEST(LineKernelResidual, ConvergesWithQuadratureOrder) {
  const Grid g(32, 32.0);
  const ScalarField rho = charge_density(g, dipole(g));
  std::vector<double> r;
  for (int m : {2, 4, 8}) r.push_back(line_kernel_residual(centered_poincare(g, m), rho));
  EXPECT_LT(r[1], 2e-2 * r[0]);
  EXPECT_LT(r[2], 1e-4);
  PoincareKernel lin = centered_poincare(g, 8);
  lin.interpolation = Interpolation::Linear;
  EXPECT_GT(line_kernel_residual(lin, rho), r[2]);
}

TEST(AssembleVectorPotential, CoulombIsIdentity) {
  const Grid g(16, 1.0);
  const VectorField a = random_transverse_field(g, 5);
  EXPECT_EQ(max_norm(assemble_vector_potential(a, CoulombKernel{}) - a), 0.0);
}

TEST(AssembleVectorPotential, MagneticFieldIsGaugeInvariant) {
  const Grid g(16, 1.0);
  const VectorField a = random_transverse_field(g, 6);
  const VectorField b = curl(a);
  for (const GaugeKernel& k :
       std::vector<GaugeKernel>{CoulombKernel{}, centered_poincare(g), KernelRegistry::instance().get("gaussian-shift")}) {
    EXPECT_LT(max_norm(curl(assemble_vector_potential(a, k)) - b), 1e-12 * max_norm(b)) << describe(k);
  }
}

// Localized transverse field: curl of a compact Gaussian vector bump near the origin.
TEST(AssembleVectorPotential, PoincareGaugeConditionImprovesWithOrder) {
  const Grid g(48, 48.0);
  const PoincareKernel base = centered_poincare(g);
  const Vec3 c = base.origin + Vec3{3.0, -2.0, 1.0};
  const Vec3 u{0.3, 0.5, -0.8};
  const auto bump = VectorField::from_function(g, [&](const Vec3& x) {
    return u * periodic_gauss3(x - c, 2.0 * g.spacing(), g.length()).value;
  });
  const VectorField a_t = curl(bump);
  std::vector<double> cond;
  for (int m : {4, 8, 16}) {
    PoincareKernel k = base;
    k.quadrature_order = m;
    cond.push_back(gauge_condition_ratio(assemble_vector_potential(a_t, k), k.origin, 0.25 * g.length()));
  }
  EXPECT_LT(cond[1], 1e-2 * cond[0]);
  EXPECT_LE(cond[2], cond[1]);
  EXPECT_LT(cond[2], 1e-3);
}

TEST(ResidualGaugeShift, ConstantBetaAndInvariants) {
  const Grid g(16, 1.0);
  const VectorField a = random_transverse_field(g, 7) + grad(random_neutral_scalar(g, 8));
  const auto c = ScalarField::from_function(g, [](const Vec3&) { return 3.0; });
  EXPECT_LT(max_norm(residual_gauge_shift(a, c) - a), 1e-14 * max_norm(a));
  const ScalarField beta = random_neutral_scalar(g, 9);
  const VectorField shifted = residual_gauge_shift(a, beta);
  EXPECT_LT(max_norm(curl(shifted) - curl(a)), 1e-12 * max_norm(curl(a)));
  EXPECT_LT(max_norm(transverse_part(shifted) - transverse_part(a)), 1e-12 * max_norm(a));
}

TEST(GaugeKernel, DescribeAndInterpolationNames) {
  EXPECT_EQ(describe(CoulombKernel{}), "coulomb");
  EXPECT_EQ(interpolation_from_string("trilinear"), Interpolation::Linear);
  EXPECT_EQ(to_string(Interpolation::Spectral), "spectral");
  EXPECT_THROW(interpolation_from_string("bogus"), Error);
}

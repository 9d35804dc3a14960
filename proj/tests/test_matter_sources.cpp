#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include "gaugekit/matter_sources.hpp"

using namespace gaugekit;

namespace {

SourceBlob blob(const Grid& g, double omega0 = 0.8) {
  const double c = 0.5 * g.length();
  return {{c + 0.3, c, c - 0.2}, 2.0 * g.spacing(), {0.2, -0.5, 1.0}, omega0, 3.0, 1.0, "A"};
}

}  // namespace

TEST(Smoothstep, EndpointsAndContinuity) {
  EXPECT_EQ(smoothstep(-1.0).value, 0.0);
  EXPECT_EQ(smoothstep(2.0).value, 1.0);
  for (double u : {1e-9, 1.0 - 1e-9}) {
    const Smoothstep s = smoothstep(u);
    EXPECT_LT(s.d1, 1e-7);
    EXPECT_LT(std::abs(s.d2), 1e-6);
  }
  const double u = 0.37, e = 1e-6;
  EXPECT_NEAR(smoothstep(u).d1, (smoothstep(u + e).value - smoothstep(u - e).value) / (2 * e), 1e-8);
  EXPECT_NEAR(smoothstep(u).d2, (smoothstep(u + e).d1 - smoothstep(u - e).d1) / (2 * e), 1e-6);
}

TEST(SourceBlob, MomentDerivativesMatchFiniteDifferences) {
  const SourceBlob b = blob(Grid(16, 16.0));
  for (double t : {1.4, 2.9, 5.0}) {
    const double e = 1e-5;
    const Moment m = b.moment(t), mp = b.moment(t + e), mm = b.moment(t - e);
    EXPECT_LT(norm(m.p_dot - (mp.p - mm.p) / (2 * e)), 1e-8);
    EXPECT_LT(norm(m.p_ddot - (mp.p_dot - mm.p_dot) / (2 * e)), 1e-7);
  }
  SourceBlob s = b;
  s.omega0 = 0.0;
  EXPECT_EQ(s.moment(10.0).p, s.amplitude);
}

TEST(RhoAt, ZeroBeforeTurnOn) {
  const Grid g(16, 16.0);
  const SourceModel m{{blob(g)}};
  EXPECT_EQ(max_abs(rho_at(m, g, 0.5)), 0.0);
  EXPECT_EQ(max_norm(j_at(m, g, 1.0)), 0.0);
}

TEST(RhoAt, NeutralAtAllTimes) {
  const Grid g(16, 16.0);
  const SourceModel m{{blob(g)}};
  for (double t : {1.5, 3.3, 8.0}) {
    const ScalarField rho = rho_at(m, g, t);
    EXPECT_LT(std::abs(volume_integral(rho)), 1e-13 * l2_norm(rho) * std::sqrt(g.volume()));
  }
}

TEST(RhoAt, SingleBlobMatchesClosedForm) {
  const Grid g(32, 32.0);
  const SourceBlob b = blob(g);
  const ScalarField rho = rho_at({{b}}, g, 2.7);
  double worst = 0.0;
  for (std::size_t s = 0; s < g.sites(); ++s) worst = std::max(worst, std::abs(rho[s] - analytic_rho(b, g, g.position(s), 2.7)));
  EXPECT_LT(worst, 1e-7 * max_abs(rho));
}

TEST(JAt, ContinuityHoldsIdentically) {
  const Grid g(16, 16.0);
  const SourceSampler s(g, {{blob(g), blob(g, 0.3)}});
  for (double t : {1.2, 2.5, 6.0}) {
    const ScalarField r = s.drho_dt_at(t) + div(s.j_at(t));
    EXPECT_LT(l2_norm(r), 1e-12 * l2_norm(s.drho_dt_at(t)));
  }
}

TEST(JAt, EnvelopeConstantAfterRamp) {
  const Grid g(16, 16.0);
  const SourceBlob b = blob(g);
  const SourceSampler s(g, {{b}});
  const std::size_t site = g.index(8, 8, 8);
  const double t0 = b.t_on + b.ramp + 1.0;
  const double period = 2 * M_PI / b.omega0;
  std::vector<double> env;
  for (int k = 0; k <= 16; ++k) {
    const double t = t0 + period * k / 16.0;
    const Vec3 j = s.j_at(t).at(site);
    const Vec3 p = s.polarization_at(t).at(site);
    env.push_back(std::sqrt(dot(j, j) + b.omega0 * b.omega0 * dot(p, p)));
  }
  const auto [lo, hi] = std::minmax_element(env.begin(), env.end());
  EXPECT_LT((*hi - *lo) / *hi, 1e-10);
}

TEST(Support, GaussianMassMatchesChiDistribution) {
  for (double k : {1.0, 2.0, 4.0, 5.0}) {
    EXPECT_NEAR(gaussian_mass_within(k), boost::math::gamma_p(1.5, 0.5 * k * k), 1e-14);
  }
  EXPECT_GT(gaussian_mass_within(5.0), 0.9999);
  EXPECT_LT(gaussian_mass_within(4.0), 0.9999);
}

TEST(SourceBlob, Validation) {
  const Grid g(16, 16.0);
  SourceBlob b = blob(g);
  b.sigma = 3.0;
  EXPECT_THROW(validate_blob(b, g), Error);
  b = blob(g);
  b.ramp = 0.0;
  EXPECT_THROW(validate_blob(b, g), Error);
  b = blob(g);
  b.omega0 = -1.0;
  EXPECT_THROW(SourceSampler(g, {{b}}), Error);
}

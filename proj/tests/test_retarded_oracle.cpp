#include <gtest/gtest.h>

#include "gaugekit/dynamics.hpp"
#include "gaugekit/retarded_oracle.hpp"

using namespace gaugekit;

namespace {

SourceBlob blob_at(const Vec3& c, double omega0) { return {c, 2.0, {0.3, -0.2, 1.0}, omega0, 4.0, 0.0, "A"}; }

std::vector<std::size_t> probe_sites(const Grid& g, const Vec3& c, const std::vector<int>& distances) {
  std::vector<std::size_t> out;
  const std::array<Vec3, 4> dirs{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, -1}, Vec3{-1, 0, 0}};
  for (int d : distances) {
    for (const Vec3& v : dirs) {
      const Vec3 x = (c + v * static_cast<double>(d)) / g.spacing();
      out.push_back(g.index(static_cast<int>(std::lround(x.x)), static_cast<int>(std::lround(x.y)),
                            static_cast<int>(std::lround(x.z))));
    }
  }
  return out;
}

double relative_l2(const std::vector<Vec3>& a, const std::vector<Vec3>& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += dot(a[i] - ref[i], a[i] - ref[i]);
    den += dot(ref[i], ref[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST(RetardedOracle, ZeroBeforeTurnOn) {
  SourceBlob b = blob_at({16, 16, 16}, 0.5);
  b.t_on = 3.0;
  const RetardedResult r = retarded_fields({{{b}}, {{20, 16, 16}}, 2.5, 32.0});
  EXPECT_EQ(norm(r.e[0]), 0.0);
  EXPECT_EQ(norm(r.b[0]), 0.0);
}

TEST(RetardedOracle, StaticLimitMatchesCoulombField) {
  const Grid g(64, 64.0);
  const Vec3 c{32, 32, 32};
  const SourceModel m{{blob_at(c, 0.0)}};
  const VectorField e_l = -1.0 * grad(coulomb_potential(rho_at(m, g, 40.0)));
  const auto sites = probe_sites(g, c, {6, 8});
  std::vector<Vec3> pts, lattice;
  for (std::size_t s : sites) {
    pts.push_back(g.position(s));
    lattice.push_back(e_l.at(s));
  }
  const RetardedResult r = retarded_fields({m, pts, 40.0, g.length()});
  EXPECT_LT(relative_l2(r.e, lattice), 1e-2);
  for (const Vec3& b : r.b) EXPECT_EQ(norm(b), 0.0);
}

TEST(RetardedOracle, CausalityInstrumentation) {
  const SourceModel m{{blob_at({16, 16, 16}, 0.5)}};
  for (double t : {0.5, 3.0, 9.0}) {
    const RetardedResult r = retarded_fields({m, {{16, 16, 26}, {24, 16, 16}}, t, 64.0});
    EXPECT_TRUE(r.causal);
    EXPECT_LE(r.max_distance, t);
  }
}

TEST(RetardedOracle, WrapAroundWindowRejected) {
  const SourceModel m{{blob_at({16, 16, 16}, 0.5)}};
  try {
    (void)retarded_fields({m, {{16, 16, 26}}, 22.5, 32.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrapAroundWindowExceeded);
  }
  EXPECT_NO_THROW((void)retarded_fields({m, {{16, 16, 26}}, 21.5, 32.0}));
  EXPECT_THROW((void)retarded_fields({m, {{16, 16, 26}}, 1.0, 0.0}), Error);
}

TEST(RetardedOracle, OscillatingBlobMatchesLattice) {
  const Grid g(32, 32.0);
  const Vec3 c{16, 16, 16};
  const SourceModel m{{blob_at(c, 0.5)}};
  const auto sites = probe_sites(g, c, {6});
  std::vector<Vec3> pts;
  for (std::size_t s : sites) pts.push_back(g.position(s));
  Simulation sim(g, m, 0.0, {}, pts);
  const double dt = 0.5 * max_stable_dt(g), t_end = 32.0 - 6.0 - 1.0;
  std::vector<Vec3> se, sb, oe, ob;
  for (int n = 1; n * dt < t_end; ++n) {
    sim.step(dt);
    if (n % 10 != 0) continue;
    const RetardedResult r = retarded_fields({m, pts, sim.time(), g.length()});
    for (std::size_t p = 0; p < pts.size(); ++p) {
      se.push_back(sim.probe_e()[p]);
      sb.push_back(sim.probe_b()[p]);
      oe.push_back(r.e[p]);
      ob.push_back(r.b[p]);
    }
  }
  EXPECT_LT(relative_l2(se, oe), 0.03);
  EXPECT_LT(relative_l2(sb, ob), 0.03);
}

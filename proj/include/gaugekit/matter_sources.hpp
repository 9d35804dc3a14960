#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gaugekit/gaussian.hpp"
#include "gaugekit/lattice_ops.hpp"

namespace gaugekit {

/// C2 smoothstep s(u) = 6u^5 - 15u^4 + 10u^3 clamped to [0, 1], with derivatives.
struct Smoothstep {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline Smoothstep smoothstep(double u) {
  if (u <= 0.0) return {};
  if (u >= 1.0) return {1.0, 0.0, 0.0};
  const double u2 = u * u, u3 = u2 * u;
  return {u3 * (10.0 + u * (-15.0 + 6.0 * u)), 30.0 * u2 * (1.0 - u) * (1.0 - u), 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)};
}

/// Dipole moment and its first two time derivatives.
struct Moment {
  Vec3 p;
  Vec3 p_dot;
  Vec3 p_ddot;
};

/// One Gaussian blob of source polarization: P = p(t) G_sigma(x - center), with
/// p(t) = amplitude carrier(t - t_on) s((t - t_on)/ramp) for t >= t_on. The carrier is
/// sin(omega0 u) for omega0 > 0 and 1 for omega0 = 0 (a ramped static dipole).
struct SourceBlob {
  Vec3 center;
  double sigma = 1.0;
  Vec3 amplitude;
  double omega0 = 0.0;
  double ramp = 1.0;
  double t_on = 0.0;
  std::string label;

  Moment moment(double t) const {
    const double u = t - t_on;
    if (u <= 0.0) return {};
    const Smoothstep s = smoothstep(u / ramp);
    const double s1 = s.d1 / ramp, s2 = s.d2 / (ramp * ramp);
    double c = 1.0, c1 = 0.0, c2 = 0.0;
    if (omega0 > 0.0) {
      c = std::sin(omega0 * u);
      c1 = omega0 * std::cos(omega0 * u);
      c2 = -omega0 * omega0 * c;
    }
    return {amplitude * (c * s.value), amplitude * (c1 * s.value + c * s1),
            amplitude * (c2 * s.value + 2.0 * c1 * s1 + c * s2)};
  }
};

inline void validate_blob(const SourceBlob& b, const Grid& g) {
  if (!(b.sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "source width must be positive");
  if (!(b.ramp > 0.0)) throw Error(ErrorCode::InvalidArgument, "source ramp time must be positive");
  if (b.omega0 < 0.0) throw Error(ErrorCode::InvalidArgument, "carrier frequency must be >= 0");
  if (b.sigma > g.length() / 8.0) {
    throw Error(ErrorCode::InvalidArgument, "source width must be below L/8 for the image-sum Gaussian");
  }
}

/// Prescribed sources from a source polarization P_src; rho = -div P_src, j = dP_src/dt.
struct SourceModel {
  std::vector<SourceBlob> blobs;

  double earliest_on() const {
    double t = INFINITY;
    for (const auto& b : blobs) t = std::min(t, b.t_on);
    return t;
  }
};

/// Lattice samples of each blob's periodic Gaussian profile, cached for repeated evaluation.
class SourceSampler {
 public:
  SourceSampler(const Grid& grid, SourceModel model) : grid_(grid), model_(std::move(model)) {
    for (const auto& b : model_.blobs) {
      validate_blob(b, grid);
      profiles_.push_back(ScalarField::from_function(
          grid, [&](const Vec3& x) { return periodic_gauss3(x - b.center, b.sigma, grid.length()).value; }));
    }
  }

  const Grid& grid() const { return grid_; }
  const SourceModel& model() const { return model_; }
  const ScalarField& profile(std::size_t b) const { return profiles_[b]; }
  std::size_t size() const { return profiles_.size(); }

  /// sum_b v_b G_b for per-blob vectors v_b.
  VectorField combine(const std::vector<Vec3>& v) const {
    VectorField out(grid_);
    std::array<std::span<double>, 3> o{out[0].mutable_values(), out[1].mutable_values(), out[2].mutable_values()};
    for (std::size_t b = 0; b < profiles_.size(); ++b) {
      if (v[b] == Vec3{}) continue;
      const auto g = profiles_[b].values();
      for (std::size_t s = 0; s < g.size(); ++s) {
        for (std::size_t a = 0; a < 3; ++a) o[a][s] += v[b][a] * g[s];
      }
    }
    return out;
  }

  std::vector<Moment> moments(double t) const {
    std::vector<Moment> m;
    for (const auto& b : model_.blobs) m.push_back(b.moment(t));
    return m;
  }

  VectorField polarization_at(double t) const {
    std::vector<Vec3> v;
    for (const auto& m : moments(t)) v.push_back(m.p);
    return combine(v);
  }

  ScalarField rho_at(double t) const { return -1.0 * div(polarization_at(t)); }

  VectorField j_at(double t) const {
    std::vector<Vec3> v;
    for (const auto& m : moments(t)) v.push_back(m.p_dot);
    return combine(v);
  }

  /// Time derivative of rho taken analytically in t: -div(sum p_dot G).
  ScalarField drho_dt_at(double t) const { return -1.0 * div(j_at(t)); }

 private:
  Grid grid_;
  SourceModel model_;
  std::vector<ScalarField> profiles_;
};

inline ScalarField rho_at(const SourceModel& model, const Grid& grid, double t) {
  return SourceSampler(grid, model).rho_at(t);
}

inline VectorField j_at(const SourceModel& model, const Grid& grid, double t) {
  return SourceSampler(grid, model).j_at(t);
}

/// Pointwise closed form of rho for one blob: -p . grad G (periodic Gaussian).
inline double analytic_rho(const SourceBlob& b, const Grid& g, const Vec3& x, double t) {
  return -dot(b.moment(t).p, periodic_gauss3(x - b.center, b.sigma, g.length()).gradient);
}

/// Fraction of a 3-D Gaussian's mass within k widths of its centre (chi distribution, 3 dof).
inline double gaussian_mass_within(double k) {
  return std::erf(k / std::sqrt(2.0)) - std::sqrt(2.0 / M_PI) * k * std::exp(-0.5 * k * k);
}

}  // namespace gaugekit

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gaugekit/matter_sources.hpp"

namespace gaugekit {

/// Free-space retarded fields of Gaussian blobs at points of a periodic box.
///
/// Each blob contributes through its nearest image only, so results are valid
/// while no second image is inside the backward light cone: t < L - d_max.
struct RetardedQuery {
  SourceModel sources;
  std::vector<Vec3> points;
  double t = 0.0;
  double box_length = 0.0;
  double spacing_per_sigma = 0.25;  // quadrature step in units of sigma
  double support_sigmas = 5.0;      // quadrature ball radius in units of sigma
};

struct RetardedResult {
  std::vector<Vec3> e;
  std::vector<Vec3> b;
  // Largest |x - x'| of any sample that contributed, and the light-cone radius
  // t - t_on of its blob at that sample; causality means max_distance <= max_cone.
  double max_distance = 0.0;
  double max_cone = 0.0;
  bool causal = true;
};

namespace detail {

// Sigma' 1/|n| over Z^3 minus its integral (the simple-cubic lattice zeta value).
// Adding kPuncturedLatticeCorrection h^2 f(0) to the punctured sum h^3 sum' f(x_n)/|x_n|
// restores the integral of f/|x| to O(h^4) for smooth f.
inline constexpr double kPuncturedLatticeCorrection = 2.8372974794806;

}  // namespace detail

inline double max_source_distance(const RetardedQuery& q) {
  const Grid box(4, q.box_length);
  double d = 0.0;
  for (const auto& b : q.sources.blobs) {
    for (const auto& x : q.points) d = std::max(d, norm(box.min_image(b.center, x)));
  }
  return d;
}

/// E_r = -(1/4pi) int nu(x', t_r)/R with nu = grad rho + dj/dt, and
/// B_r = (1/4pi) int (curl j)(x', t_r)/R, by direct quadrature of the closed-form sources.
inline RetardedResult retarded_fields(const RetardedQuery& q) {
  if (!(q.box_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "box length must be positive");
  if (!(q.spacing_per_sigma > 0.0) || !(q.support_sigmas > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "quadrature step and support must be positive");
  }
  const double dmax = max_source_distance(q);
  if (q.t >= q.box_length - dmax) {
    throw Error(ErrorCode::WrapAroundWindowExceeded, "t = " + std::to_string(q.t) + " is not below L - d = " +
                                                         std::to_string(q.box_length - dmax));
  }
  const Grid box(4, q.box_length);
  RetardedResult out;
  out.e.assign(q.points.size(), Vec3{});
  out.b.assign(q.points.size(), Vec3{});
  for (const auto& blob : q.sources.blobs) {
    if (q.t <= blob.t_on) continue;
    const double h = q.spacing_per_sigma * blob.sigma;
    const double w = h * h * h / (4.0 * M_PI);
    const double support = q.support_sigmas * blob.sigma;
    for (std::size_t n = 0; n < q.points.size(); ++n) {
      // Quadrature lattice anchored at the evaluation point, so the 1/R singularity
      // sits on a node and is handled by the punctured-lattice correction.
      const Vec3 rel = box.min_image(blob.center, q.points[n]);
      std::array<int, 3> lo{}, hi{};
      for (std::size_t a = 0; a < 3; ++a) {
        lo[a] = static_cast<int>(std::ceil((-support - rel[a]) / h));
        hi[a] = static_cast<int>(std::floor((support - rel[a]) / h));
      }
      Vec3 e, bf;
      auto accumulate = [&](const Vec3& offset, double weight, double r) {
        const Moment m = blob.moment(q.t - r);
        const Gauss3 g = gauss3(offset, blob.sigma);
        const auto& hs = g.hessian;
        Vec3 nu;
        for (std::size_t a = 0; a < 3; ++a) {
          nu[a] = -(hs[a][0] * m.p.x + hs[a][1] * m.p.y + hs[a][2] * m.p.z) + m.p_ddot[a] * g.value;
        }
        e -= nu * weight;
        bf += cross(g.gradient, m.p_dot) * weight;
      };
      for (int k = lo[2]; k <= hi[2]; ++k) {
        for (int j = lo[1]; j <= hi[1]; ++j) {
          for (int i = lo[0]; i <= hi[0]; ++i) {
            const Vec3 step{i * h, j * h, k * h};
            const Vec3 offset = rel + step;  // x' - center
            if (norm(offset) > support) continue;
            const double r = norm(step);
            if (i == 0 && j == 0 && k == 0) {
              accumulate(offset, w * 4.0 * M_PI * detail::kPuncturedLatticeCorrection / (4.0 * M_PI * h), 0.0);
              continue;
            }
            if (q.t - r <= blob.t_on) continue;
            out.max_distance = std::max(out.max_distance, r);
            out.max_cone = std::max(out.max_cone, q.t - blob.t_on);
            if (r > q.t - blob.t_on) out.causal = false;
            accumulate(offset, w / r, r);
          }
        }
      }
      out.e[n] += e;
      out.b[n] += bf;
    }
  }
  return out;
}

inline std::vector<Vec3> retarded_E(const RetardedQuery& q) { return retarded_fields(q).e; }

inline std::vector<Vec3> retarded_B(const RetardedQuery& q) { return retarded_fields(q).b; }

}  // namespace gaugekit

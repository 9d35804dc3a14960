#pragma once

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "gaugekit/gaussian.hpp"
#include "gaugekit/poisson.hpp"

namespace gaugekit {

/// Point charges; deposited as narrow periodic Gaussians.
struct PointCharge {
  double q = 0.0;
  Vec3 position;
};

struct ChargeEnsemble {
  std::vector<PointCharge> charges;
  double smearing = 0.0;  // Gaussian width; 0 means 2h
};

/// Charge density of an ensemble, restricted to the modes a divergence can reach.
inline ScalarField charge_density(const Grid& g, const ChargeEnsemble& ensemble) {
  double net = 0.0, total = 0.0;
  for (const auto& c : ensemble.charges) {
    net += c.q;
    total += std::abs(c.q);
  }
  if (std::abs(net) > kNeutralityTolerance * total) {
    throw Error(ErrorCode::NonNeutralSource, "charge ensemble is not neutral");
  }
  const double sigma = ensemble.smearing > 0.0 ? ensemble.smearing : 2.0 * g.spacing();
  ScalarField rho = ScalarField::from_function(g, [&](const Vec3& x) {
    double v = 0.0;
    for (const auto& c : ensemble.charges) v += c.q * periodic_gauss3(x - c.position, sigma, g.length()).value;
    return v;
  });
  return divergence_range(rho);
}

/// Node placement for interpolating lattice fields at off-lattice points.
enum class Interpolation {
  Linear,   // 2-point (trilinear)
  Cubic,    // 4-point Lagrange
  Quintic,  // 6-point Lagrange
  Spectral, // periodic band-limited (Dirichlet kernel)
};

inline std::string to_string(Interpolation i) {
  switch (i) {
    case Interpolation::Linear: return "linear";
    case Interpolation::Cubic: return "cubic";
    case Interpolation::Quintic: return "quintic";
    case Interpolation::Spectral: return "spectral";
  }
  return "unknown";
}

inline Interpolation interpolation_from_string(const std::string& s) {
  if (s == "linear" || s == "trilinear") return Interpolation::Linear;
  if (s == "cubic") return Interpolation::Cubic;
  if (s == "quintic") return Interpolation::Quintic;
  if (s == "spectral") return Interpolation::Spectral;
  throw Error(ErrorCode::InvalidArgument, "unknown interpolation '" + s + "'");
}

struct CoulombKernel {};

/// Straight-line kernel from `origin`. chi is tapered radially between
/// taper_inner and taper_outer (fractions of L/2) so that it is periodic.
struct PoincareKernel {
  Vec3 origin;
  int quadrature_order = 32;
  Interpolation interpolation = Interpolation::Spectral;
  double taper_inner = 0.55;
  double taper_outer = 1.0;
};

/// User transverse kernel: chi = chi_map(A_T), P_T = polarization_map(rho), with
/// integral P_T . A_T = -integral rho chi required for registration.
struct CustomKernel {
  std::string name;
  std::function<ScalarField(const VectorField&)> chi_map;
  std::function<VectorField(const ScalarField&)> polarization_map;
};

using GaugeKernel = std::variant<CoulombKernel, PoincareKernel, CustomKernel>;

inline std::string describe(const GaugeKernel& k) {
  if (std::holds_alternative<CoulombKernel>(k)) return "coulomb";
  if (const auto* p = std::get_if<PoincareKernel>(&k)) {
    return "poincare(M=" + std::to_string(p->quadrature_order) + "," + to_string(p->interpolation) + ")";
  }
  return "custom:" + std::get<CustomKernel>(k).name;
}

namespace detail {

// Gauss-Legendre nodes and weights on [0, 1].
inline void gauss_legendre(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(m);
  auto push = [&](double x) {
    const double dp = boost::math::legendre_p_prime(m, x);
    nodes.push_back(0.5 * (x + 1.0));
    weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it) {
    if (*it != 0.0) push(-*it);
  }
  for (double z : zeros) push(z);
}

// Error-function step centred between a and b; 1 - 2e-5 at a, 2e-5 at b.
inline double smooth_taper(double r, double a, double b) {
  const double width = (b - a) / 6.0;
  return 0.5 * std::erfc((r - 0.5 * (a + b)) / width);
}

// Periodic band-limited interpolation weight for a sample `y` away from a node.
inline double dirichlet(double y, int n, double length) {
  y -= length * std::floor(y / length + 0.5);
  const double theta = M_PI * y / length;
  const double s = std::sin(theta);
  if (std::abs(s) < 1e-14) return 1.0;
  return std::sin(n * theta) * std::cos(theta) / (s * n);
}

// One row per output position: weights on input nodes start, start+1, ... (mod n).
struct AxisOperator {
  int n = 0;
  int width = 0;
  std::vector<int> start;
  std::vector<double> weights;  // n rows of `width`

  void apply(const double* in, double* out) const {
    for (int j = 0; j < n; ++j) {
      const double* w = &weights[static_cast<std::size_t>(j) * width];
      double sum = 0.0;
      int c = start[j];
      for (int t = 0; t < width; ++t, ++c) {
        if (c >= n) c -= n;
        sum += w[t] * in[c];
      }
      out[j] = sum;
    }
  }

  void apply_transpose(const double* in, double* out) const {
    std::fill(out, out + n, 0.0);
    for (int j = 0; j < n; ++j) {
      const double* w = &weights[static_cast<std::size_t>(j) * width];
      int c = start[j];
      for (int t = 0; t < width; ++t, ++c) {
        if (c >= n) c -= n;
        out[c] += w[t] * in[j];
      }
    }
  }
};

// Band-limited interpolation matrix: row j evaluates the periodic interpolant at positions[j].
inline Eigen::MatrixXd dense_axis_matrix(const std::vector<double>& positions, int n, double length) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(positions.size()), n);
  const double h = length / n;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    for (int c = 0; c < n; ++c) m(static_cast<Eigen::Index>(j), c) = dirichlet(positions[j] - c * h, n, length);
  }
  return m;
}

// Lagrange interpolation at positions p_j (per axis, in length units), banded and periodic.
inline AxisOperator make_axis_operator(const std::vector<double>& positions, Interpolation kind, int n, double length) {
  AxisOperator op;
  op.n = n;
  const double h = length / n;
  const int width = kind == Interpolation::Linear ? 2 : (kind == Interpolation::Cubic ? 4 : 6);
  const int left = width / 2 - 1;
  op.width = width;
  for (double p : positions) {
    const double g = p / h;
    const double base = std::floor(g);
    const double f = g - base;
    int start = static_cast<int>(base) - left;
    start %= n;
    if (start < 0) start += n;
    op.start.push_back(start);
    for (int j = 0; j < width; ++j) {
      double w = 1.0;
      for (int l = 0; l < width; ++l) {
        if (l != j) w *= (f - (l - left)) / static_cast<double>(j - l);
      }
      op.weights.push_back(w);
    }
  }
  return op;
}

// Tensor-product application of three axis operators to a lattice array.
inline void apply_tensor(const std::array<const AxisOperator*, 3>& ops, std::vector<double>& data, int n,
                         bool transpose) {
  std::vector<double> line(n), result(n);
  const std::size_t nn = static_cast<std::size_t>(n);
  const std::array<std::size_t, 3> stride{1, nn, nn * nn};
  for (std::size_t axis = 0; axis < 3; ++axis) {
    const std::size_t s = stride[axis];
    const std::size_t o1 = stride[(axis + 1) % 3], o2 = stride[(axis + 2) % 3];
    for (std::size_t a = 0; a < nn; ++a) {
      for (std::size_t b = 0; b < nn; ++b) {
        const std::size_t base = a * o1 + b * o2;
        for (std::size_t j = 0; j < nn; ++j) line[j] = data[base + j * s];
        if (transpose) {
          ops[axis]->apply_transpose(line.data(), result.data());
        } else {
          ops[axis]->apply(line.data(), result.data());
        }
        for (std::size_t j = 0; j < nn; ++j) data[base + j * s] = result[j];
      }
    }
  }
}

// Same as apply_tensor for dense axis matrices, as matrix products over the lattice array.
inline void apply_tensor_dense(const std::array<Eigen::MatrixXd, 3>& ops, std::vector<double>& data, int n,
                               bool transpose) {
  using Eigen::Map;
  using Eigen::MatrixXd;
  const Eigen::Index nn = n;
  MatrixXd tmp;
  Map<MatrixXd> xs(data.data(), nn, nn * nn);
  if (transpose) {
    tmp.noalias() = ops[0].transpose() * xs;
  } else {
    tmp.noalias() = ops[0] * xs;
  }
  xs = tmp;
  for (Eigen::Index k = 0; k < nn; ++k) {
    Map<MatrixXd> slab(data.data() + k * nn * nn, nn, nn);
    if (transpose) {
      tmp.noalias() = slab * ops[1];
    } else {
      tmp.noalias() = slab * ops[1].transpose();
    }
    slab = tmp;
  }
  Map<MatrixXd> zs(data.data(), nn * nn, nn);
  if (transpose) {
    tmp.noalias() = zs * ops[2];
  } else {
    tmp.noalias() = zs * ops[2].transpose();
  }
  zs = tmp;
}

}  // namespace detail

/// Discretized straight-line operator of a Poincare kernel on one grid.
///
/// chi(x) = -W(|d|) sum_m w_m d . A(x0 + lambda_m d), d the minimum-image
/// displacement x - x0. The line polarization is built as the exact transpose.
class PoincareOperator {
 public:
  PoincareOperator(const Grid& grid, const PoincareKernel& kernel) : grid_(grid), kernel_(kernel) {
    if (kernel.quadrature_order < 1) throw Error(ErrorCode::InvalidArgument, "quadrature order must be >= 1");
    if (!(0.0 < kernel.taper_inner && kernel.taper_inner < kernel.taper_outer && kernel.taper_outer <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "taper radii must satisfy 0 < inner < outer <= 1");
    }
    const int n = grid.n();
    const double len = grid.length();
    for (std::size_t a = 0; a < 3; ++a) {
      disp_[a].resize(n);
      for (int i = 0; i < n; ++i) {
        double d = i * grid.spacing() - kernel.origin[a];
        d -= len * std::floor(d / len + 0.5);
        disp_[a][i] = d;
      }
    }
    taper_.resize(grid.sites());
    for (std::size_t s = 0; s < grid.sites(); ++s) {
      const Vec3 d = displacement(s);
      taper_[s] = detail::smooth_taper(norm(d) / (0.5 * len), kernel.taper_inner, kernel.taper_outer);
    }
    detail::gauss_legendre(kernel.quadrature_order, nodes_, weights_);
    const bool dense = kernel.interpolation == Interpolation::Spectral;
    for (double lam : nodes_) {
      std::array<detail::AxisOperator, 3> ops;
      std::array<Eigen::MatrixXd, 3> mats;
      for (std::size_t a = 0; a < 3; ++a) {
        std::vector<double> pos(n);
        for (int i = 0; i < n; ++i) pos[i] = kernel.origin[a] + lam * disp_[a][i];
        if (dense) {
          mats[a] = detail::dense_axis_matrix(pos, n, len);
        } else {
          ops[a] = detail::make_axis_operator(pos, kernel.interpolation, n, len);
        }
      }
      if (dense) {
        dense_ops_.push_back(std::move(mats));
      } else {
        ops_.push_back(std::move(ops));
      }
    }
  }

  const Grid& grid() const { return grid_; }
  const PoincareKernel& kernel() const { return kernel_; }

  Vec3 displacement(std::size_t s) const {
    const auto n = static_cast<std::size_t>(grid_.n());
    return {disp_[0][s % n], disp_[1][(s / n) % n], disp_[2][s / (n * n)]};
  }

  double taper(std::size_t s) const { return taper_[s]; }

  ScalarField chi(const VectorField& a) const {
    require_same_grid(grid_, a.grid());
    std::vector<double> acc(grid_.sites(), 0.0), work;
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
      for (std::size_t c = 0; c < 3; ++c) {
        work.assign(a[c].values().begin(), a[c].values().end());
        interpolate(m, work, false);
        for (std::size_t s = 0; s < work.size(); ++s) acc[s] += weights_[m] * displacement_component(s, c) * work[s];
      }
    }
    for (std::size_t s = 0; s < acc.size(); ++s) acc[s] *= -taper_[s];
    return ScalarField(grid_, std::move(acc));
  }

  /// Transpose of chi: integral P . A = -integral rho chi[A] for every lattice A.
  VectorField line_polarization(const ScalarField& rho) const {
    require_same_grid(grid_, rho.grid());
    VectorField out(grid_);
    std::array<std::vector<double>, 3> acc;
    for (auto& v : acc) v.assign(grid_.sites(), 0.0);
    std::vector<double> work(grid_.sites());
    for (std::size_t m = 0; m < nodes_.size(); ++m) {
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t s = 0; s < work.size(); ++s) work[s] = weights_[m] * displacement_component(s, c) * taper_[s] * rho[s];
        interpolate(m, work, true);
        for (std::size_t s = 0; s < work.size(); ++s) acc[c][s] += work[s];
      }
    }
    for (std::size_t c = 0; c < 3; ++c) out[c] = ScalarField(grid_, std::move(acc[c]));
    return out;
  }

 private:
  void interpolate(std::size_t m, std::vector<double>& data, bool transpose) const {
    if (dense_ops_.empty()) {
      const auto& ops = ops_[m];
      detail::apply_tensor({&ops[0], &ops[1], &ops[2]}, data, grid_.n(), transpose);
    } else {
      detail::apply_tensor_dense(dense_ops_[m], data, grid_.n(), transpose);
    }
  }

  double displacement_component(std::size_t s, std::size_t c) const {
    const auto n = static_cast<std::size_t>(grid_.n());
    const std::size_t i = c == 0 ? s % n : (c == 1 ? (s / n) % n : s / (n * n));
    return disp_[c][i];
  }

  Grid grid_;
  PoincareKernel kernel_;
  std::array<std::vector<double>, 3> disp_;
  std::vector<double> taper_;
  std::vector<double> nodes_, weights_;
  std::vector<std::array<detail::AxisOperator, 3>> ops_;
  std::vector<std::array<Eigen::MatrixXd, 3>> dense_ops_;
};

/// Relative mean of A_T against its norm; the Poincare kernel rejects a zero mode above 1e-10.
inline double zero_mode_fraction(const VectorField& a) {
  const double total = l2_norm(a);
  if (total == 0.0) return 0.0;
  Vec3 mean;
  for (std::size_t c = 0; c < 3; ++c) mean[c] = volume_integral(a[c]) / a.grid().volume();
  return norm(mean) * std::sqrt(a.grid().volume()) / total;
}

/// chi_g[A_T]; zero for Coulomb.
inline ScalarField chi_functional(const GaugeKernel& kernel, const VectorField& a_t) {
  require_transverse(a_t, "A_T");
  if (std::holds_alternative<CoulombKernel>(kernel)) return ScalarField(a_t.grid());
  if (const auto* p = std::get_if<PoincareKernel>(&kernel)) {
    if (zero_mode_fraction(a_t) > kTransverseTolerance) {
      throw Error(ErrorCode::PoincareZeroModePresent, "A_T has a uniform component");
    }
    return PoincareOperator(a_t.grid(), *p).chi(a_t);
  }
  return std::get<CustomKernel>(kernel).chi_map(a_t);
}

/// Transverse polarization of the kernel (zero for Coulomb).
inline VectorField transverse_polarization(const GaugeKernel& kernel, const ScalarField& rho) {
  require_neutral(rho);
  if (std::holds_alternative<CoulombKernel>(kernel)) return VectorField(rho.grid());
  if (const auto* p = std::get_if<PoincareKernel>(&kernel)) {
    return transverse_part(PoincareOperator(rho.grid(), *p).line_polarization(rho));
  }
  return std::get<CustomKernel>(kernel).polarization_map(rho);
}

/// Longitudinal polarization fixed by the charge: P_L = grad V, so -div P_L = rho.
inline VectorField longitudinal_polarization(const ScalarField& rho) { return grad(coulomb_potential(rho)); }

/// P_g = P_L + P_T.
inline VectorField polarization(const GaugeKernel& kernel, const ScalarField& rho) {
  return longitudinal_polarization(rho) + transverse_polarization(kernel, rho);
}

inline VectorField polarization(const GaugeKernel& kernel, const Grid& grid, const ChargeEnsemble& ensemble) {
  return polarization(kernel, charge_density(grid, ensemble));
}

/// A = A_T + grad chi_g[A_T].
inline VectorField assemble_vector_potential(const VectorField& a_t, const GaugeKernel& kernel) {
  return a_t + grad(chi_functional(kernel, a_t));
}

/// Weak residual of the raw line polarization, |int (div P_line + rho) V| / int rho V
/// with V the Coulomb potential. Zero for exact line integrals; measures quadrature
/// and interpolation error before the transverse projection hides it.
inline double line_kernel_residual(const PoincareKernel& kernel, const ScalarField& rho) {
  require_neutral(rho);
  const ScalarField v = coulomb_potential(rho);
  const double norm_v = inner(rho, v);
  if (norm_v == 0.0) return 0.0;
  const VectorField p = PoincareOperator(rho.grid(), kernel).line_polarization(rho);
  return std::abs(inner(div(p) + rho, v)) / norm_v;
}

/// max |d . A| / max (|d| |A|) over sites with |d| < radius, d = x - origin (minimum image).
inline double gauge_condition_ratio(const VectorField& a, const Vec3& origin, double radius) {
  const Grid& g = a.grid();
  double num = 0.0, den = 0.0;
  for (std::size_t s = 0; s < g.sites(); ++s) {
    const Vec3 d = g.min_image(origin, g.position(s));
    if (norm(d) >= radius) continue;
    const Vec3 v = a.at(s);
    num = std::max(num, std::abs(dot(d, v)));
    den = std::max(den, norm(d) * norm(v));
  }
  return den > 0.0 ? num / den : 0.0;
}

/// A + grad beta.
inline VectorField residual_gauge_shift(const VectorField& a, const ScalarField& beta) {
  require_same_grid(a.grid(), beta.grid());
  return a + grad(beta);
}

/// Random band-limited transverse field with no uniform part. Deterministic per seed.
inline VectorField random_transverse_field(const Grid& g, std::uint64_t seed, double kmax_fraction = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField f(g);
  for (std::size_t c = 0; c < 3; ++c) {
    auto v = f[c].mutable_values();
    for (double& x : v) x = u(rng);
  }
  const double kmax = kmax_fraction * M_PI / g.spacing();
  auto filtered = detail::map_vector_spectrum(f, [&](const Vec3& k, const std::array<Complex, 3>& v) {
    const double k2 = dot(k, k);
    if (k2 == 0.0 || k2 > kmax * kmax) return std::array<Complex, 3>{};
    const Complex kv = (k.x * v[0] + k.y * v[1] + k.z * v[2]) / k2;
    return std::array<Complex, 3>{v[0] - k.x * kv, v[1] - k.y * kv, v[2] - k.z * kv};
  });
  return filtered;
}

/// Random neutral band-limited scalar field.
inline ScalarField random_neutral_scalar(const Grid& g, std::uint64_t seed, double kmax_fraction = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g);
  for (double& x : f.mutable_values()) x = u(rng);
  const double kmax = kmax_fraction * M_PI / g.spacing();
  const Spectrum& s = f.spectrum();
  Spectrum out(g.spectral_sites());
  for_each_mode(g, [&](std::size_t idx, const Vec3& k, const Vec3&, double) {
    const double k2 = dot(k, k);
    out[idx] = (k2 == 0.0 || k2 > kmax * kmax) ? Complex{} : s[idx];
  });
  return ScalarField::from_spectrum(g, out);
}

/// Result of the adjoint identity check used at custom-kernel registration.
struct AdjointCheck {
  double lhs = 0.0;  // integral P_T . A_T
  double rhs = 0.0;  // -integral rho chi
  double relative_error = 0.0;
  double transversality = 0.0;
  bool passed = false;
};

constexpr double kAdjointTolerance = 1e-8;

inline AdjointCheck check_adjoint(const GaugeKernel& kernel, const Grid& g, std::uint64_t seed) {
  const VectorField a_t = random_transverse_field(g, seed);
  const ScalarField rho = random_neutral_scalar(g, seed + 1);
  const VectorField p_t = transverse_polarization(kernel, rho);
  const ScalarField chi = chi_functional(kernel, a_t);
  AdjointCheck out;
  out.lhs = inner(p_t, a_t);
  out.rhs = -inner(rho, chi);
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.relative_error = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  out.transversality = transversality_defect(p_t);
  out.passed = out.relative_error < kAdjointTolerance && out.transversality <= kTransverseTolerance;
  return out;
}

/// Built-in custom kernels. "gaussian-shift" is a consistent pair; "mismatched-adjoint"
/// flips the sign of its polarization and exists to exercise the rejection path.
inline std::optional<CustomKernel> builtin_custom_kernel(const std::string& name) {
  const Vec3 u{0.6, -0.3, 0.74};
  const double amplitude = 0.8;
  auto smooth = [](const ScalarField& f, double width) {
    const Grid& g = f.grid();
    const Spectrum& s = f.spectrum();
    Spectrum out(g.spectral_sites());
    for_each_mode(g, [&](std::size_t idx, const Vec3&, const Vec3& k, double) {
      out[idx] = s[idx] * std::exp(-0.5 * dot(k, k) * width * width);
    });
    return ScalarField::from_spectrum(g, out);
  };
  auto chi_map = [=](const VectorField& a) {
    const Grid& g = a.grid();
    ScalarField ua = u.x * a[0] + u.y * a[1] + u.z * a[2];
    return amplitude * smooth(ua, 1.5 * g.spacing());
  };
  auto make_pol = [=](double sign) {
    return [=](const ScalarField& rho) {
      const Grid& g = rho.grid();
      ScalarField s = smooth(rho, 1.5 * g.spacing());
      VectorField p(s * u.x, s * u.y, s * u.z);
      return transverse_part(p) * (-sign * amplitude);
    };
  };
  if (name == "gaussian-shift") return CustomKernel{name, chi_map, make_pol(1.0)};
  if (name == "mismatched-adjoint") return CustomKernel{name, chi_map, make_pol(-1.0)};
  return std::nullopt;
}

/// Registry of custom kernels that passed the adjoint identity check.
class KernelRegistry {
 public:
  static KernelRegistry& instance() {
    static KernelRegistry registry;
    return registry;
  }

  /// Checks the adjoint identity on random fields; throws KernelRegistration on failure.
  void add(const CustomKernel& kernel) {
    const AdjointCheck check = check_adjoint(kernel, Grid(16, 1.0), 20240601);
    if (!check.passed) {
      throw Error(ErrorCode::KernelRegistration, "kernel '" + kernel.name + "' fails the adjoint identity (relative error " +
                                                     std::to_string(check.relative_error) + ")");
    }
    std::lock_guard lock(mutex_);
    kernels_[kernel.name] = kernel;
  }

  /// Registered kernel, registering a built-in of that name on first use.
  CustomKernel get(const std::string& name) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = kernels_.find(name); it != kernels_.end()) return it->second;
    }
    if (auto builtin = builtin_custom_kernel(name)) {
      add(*builtin);
      return *builtin;
    }
    throw Error(ErrorCode::KernelRegistration, "no custom kernel named '" + name + "'");
  }

 private:
  std::mutex mutex_;
  std::map<std::string, CustomKernel> kernels_;
};

}  // namespace gaugekit

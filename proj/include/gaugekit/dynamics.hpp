#pragma once

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "gaugekit/matter_sources.hpp"
#include "gaugekit/poisson.hpp"

namespace gaugekit {

/// Largest accepted step: 0.5 h / (pi sqrt 3), i.e. a 0.5 safety factor on h / (max spectral frequency).
inline double max_stable_dt(const Grid& g) { return 0.5 * g.spacing() / (M_PI * std::sqrt(3.0)); }

inline void require_stable(const Grid& g, double dt) {
  if (!(dt > 0.0) || dt > max_stable_dt(g) * (1.0 + 1e-12)) {
    throw Error(ErrorCode::UnstableTimestep, "dt = " + std::to_string(dt) + " outside (0, " +
                                                 std::to_string(max_stable_dt(g)) + "]");
  }
}

struct Diagnostics {
  double gauss_residual = 0.0;  // ||div E - rho|| / max(||rho||, (2 pi / L) ||E||)
  double em_energy = 0.0;       // 1/2 int (E^2 + B^2)
  double em_invariant = 0.0;    // em_energy - dt^2/8 ||curl E||^2, conserved by the leapfrog without sources
  double work = 0.0;            // accumulated int dt int j . E over the box
};

struct SimState {
  double t = 0.0;
  VectorField e;
  VectorField b;
  std::vector<Ball> regions;
  std::vector<double> hm_regions;  // accumulated int dt int_R j . E
  Diagnostics diagnostics;
};

/// Pseudo-spectral leapfrog for dE/dt = curl B - j, dB/dt = -curl E with prescribed sources.
///
/// Fields live in Fourier space between steps. The current over a step is the
/// finite difference of the source polarization, which keeps div E = rho exact.
class Simulation {
 public:
  /// Starts from the Coulomb field of rho(t0): E = -grad V, B = 0.
  Simulation(const Grid& grid, SourceModel sources, double t0, std::vector<Ball> regions = {},
             std::vector<Vec3> probes = {})
      : grid_(grid), sources_(grid, std::move(sources)), t_(t0), regions_(std::move(regions)) {
    setup(probes);
    require_neutral(sources_.rho_at(t0));
    const auto p = polarization_spectrum(t0);
    for (std::size_t idx = 0; idx < nspec_; ++idx) {
      const Vec3 k{kx_[idx], ky_[idx], kz_[idx]};
      const double k2 = dot(k, k);
      const Complex kp = k2 > 0.0 ? (k.x * p[0][idx] + k.y * p[1][idx] + k.z * p[2][idx]) / k2 : Complex{};
      for (std::size_t a = 0; a < 3; ++a) {
        e_[a][idx] = -k[a] * kp;
        b_[a][idx] = Complex{};
      }
    }
    refresh_real_space();
    update_diagnostics(0.0);
  }

  /// Continues from an existing state.
  Simulation(const SimState& state, SourceModel sources, std::vector<Vec3> probes = {})
      : grid_(state.e.grid()), sources_(state.e.grid(), std::move(sources)), t_(state.t), regions_(state.regions) {
    setup(probes);
    for (std::size_t a = 0; a < 3; ++a) {
      e_[a] = state.e[a].spectrum();
      b_[a] = state.b[a].spectrum();
    }
    hm_ = state.hm_regions;
    hm_.resize(regions_.size(), 0.0);
    work_ = state.diagnostics.work;
    refresh_real_space();
    update_diagnostics(0.0);
  }

  const Grid& grid() const { return grid_; }
  double time() const { return t_; }
  const Diagnostics& diagnostics() const { return diag_; }
  const std::vector<double>& matter_energy() const { return hm_; }
  const std::vector<Vec3>& probe_e() const { return probe_e_; }
  const std::vector<Vec3>& probe_b() const { return probe_b_; }

  /// Lattice sites used for the probes (nearest site to each requested point).
  const std::vector<std::size_t>& probe_sites() const { return probe_sites_; }

  void step(double dt) {
    require_stable(grid_, dt);
    const auto m0 = sources_.moments(t_);
    const auto m1 = sources_.moments(t_ + dt);
    std::vector<Vec3> jb(m0.size());
    for (std::size_t b = 0; b < m0.size(); ++b) jb[b] = (m1[b].p - m0[b].p) / dt;

    kick(0.5 * dt);
    const double measure = grid_.cell_volume() / static_cast<double>(grid_.sites());
    double work_rate = 0.0;
    for (std::size_t idx = 0; idx < nspec_; ++idx) {
      const Vec3 k{kx_[idx], ky_[idx], kz_[idx]};
      std::array<Complex, 3> j{};
      for (std::size_t b = 0; b < jb.size(); ++b) {
        const Complex g = profile_spectra_[b][idx];
        for (std::size_t a = 0; a < 3; ++a) j[a] += jb[b][a] * g;
      }
      const std::array<Complex, 3> bv{b_[0][idx], b_[1][idx], b_[2][idx]};
      const std::array<Complex, 3> curl_b{times_i(k.y * bv[2] - k.z * bv[1]), times_i(k.z * bv[0] - k.x * bv[2]),
                                          times_i(k.x * bv[1] - k.y * bv[0])};
      for (std::size_t a = 0; a < 3; ++a) {
        const Complex old = e_[a][idx];
        e_[a][idx] = old + dt * (curl_b[a] - j[a]);
        work_rate += weight_[idx] * std::real(j[a] * std::conj(0.5 * (old + e_[a][idx])));
      }
    }
    work_ += dt * work_rate * measure;
    kick(0.5 * dt);
    t_ += dt;

    const std::vector<std::array<double, 3>> e_prev = region_e_;
    refresh_real_space();
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      double sum = 0.0;
      for (std::size_t n = 0; n < region_sites_[r].size(); ++n) {
        const std::size_t s = region_sites_[r][n];
        const std::size_t slot = region_offset_[r] + n;
        for (std::size_t b = 0; b < jb.size(); ++b) {
          const double g = sources_.profile(b)[s];
          for (std::size_t a = 0; a < 3; ++a) sum += jb[b][a] * g * 0.5 * (e_prev[slot][a] + region_e_[slot][a]);
        }
      }
      hm_[r] += dt * sum * grid_.cell_volume();
    }
    update_diagnostics(dt);
  }

  /// Real-space snapshot.
  SimState state() const {
    SimState s{t_, field_from(e_), field_from(b_), regions_, hm_, diag_};
    return s;
  }

  /// Fourier-space E and B, FFT layout.
  const std::array<Spectrum, 3>& e_spectrum() const { return e_; }
  const std::array<Spectrum, 3>& b_spectrum() const { return b_; }

 private:
  void setup(const std::vector<Vec3>& probes) {
    nspec_ = grid_.spectral_sites();
    kx_.resize(nspec_);
    ky_.resize(nspec_);
    kz_.resize(nspec_);
    weight_.resize(nspec_);
    for_each_mode(grid_, [&](std::size_t idx, const Vec3& k, const Vec3&, double w) {
      kx_[idx] = k.x;
      ky_[idx] = k.y;
      kz_[idx] = k.z;
      weight_[idx] = w;
    });
    for (auto& c : e_) c.assign(nspec_, Complex{});
    for (auto& c : b_) c.assign(nspec_, Complex{});
    for (std::size_t b = 0; b < sources_.size(); ++b) profile_spectra_.push_back(sources_.profile(b).spectrum());
    hm_.assign(regions_.size(), 0.0);
    std::size_t offset = 0;
    for (const auto& r : regions_) {
      region_sites_.push_back(region_sites(grid_, r));
      region_offset_.push_back(offset);
      offset += region_sites_.back().size();
    }
    region_e_.assign(offset, {0.0, 0.0, 0.0});
    const int n = grid_.n();
    for (int m = 0; m < n; ++m) phase_.push_back(std::polar(1.0, 2.0 * M_PI * m / n));
    const double h = grid_.spacing();
    for (const auto& p : probes) {
      probe_sites_.push_back(grid_.index(static_cast<int>(std::lround(p.x / h)), static_cast<int>(std::lround(p.y / h)),
                                         static_cast<int>(std::lround(p.z / h))));
    }
  }

  std::array<Spectrum, 3> polarization_spectrum(double t) const {
    std::array<Spectrum, 3> out;
    for (auto& c : out) c.assign(nspec_, Complex{});
    const auto m = sources_.moments(t);
    for (std::size_t b = 0; b < m.size(); ++b) {
      if (m[b].p == Vec3{}) continue;
      for (std::size_t idx = 0; idx < nspec_; ++idx) {
        for (std::size_t a = 0; a < 3; ++a) out[a][idx] += m[b].p[a] * profile_spectra_[b][idx];
      }
    }
    return out;
  }

  // i z
  static Complex times_i(const Complex& z) { return {-z.imag(), z.real()}; }

  void kick(double tau) {
    for (std::size_t idx = 0; idx < nspec_; ++idx) {
      const double kx = kx_[idx], ky = ky_[idx], kz = kz_[idx];
      const Complex ex = e_[0][idx], ey = e_[1][idx], ez = e_[2][idx];
      b_[0][idx] -= tau * times_i(ky * ez - kz * ey);
      b_[1][idx] -= tau * times_i(kz * ex - kx * ez);
      b_[2][idx] -= tau * times_i(kx * ey - ky * ex);
    }
  }

  VectorField field_from(const std::array<Spectrum, 3>& s) const {
    return VectorField(ScalarField::from_spectrum(grid_, s[0]), ScalarField::from_spectrum(grid_, s[1]),
                       ScalarField::from_spectrum(grid_, s[2]));
  }

  // Real-space value at one lattice site from a half spectrum.
  double site_value(const Spectrum& f, std::size_t site) const {
    const int n = grid_.n();
    const int nh = n / 2 + 1;
    const int sx = static_cast<int>(site % n), sy = static_cast<int>((site / n) % n), sz = static_cast<int>(site / (n * n));
    double sum = 0.0;
    std::size_t idx = 0;
    for (int kz = 0; kz < n; ++kz) {
      for (int ky = 0; ky < n; ++ky) {
        const Complex pyz = phase_[(ky * sy + kz * sz) % n];
        for (int kx = 0; kx < nh; ++kx, ++idx) {
          sum += weight_[idx] * std::real(f[idx] * pyz * phase_[(kx * sx) % n]);
        }
      }
    }
    return sum / static_cast<double>(grid_.sites());
  }

  void refresh_real_space() {
    // A few probes are cheaper as direct sums than as full transforms.
    const bool dense = probe_sites_.size() > 2;
    auto& f = scratch_;
    if (!region_e_.empty() || dense) {
      for (std::size_t a = 0; a < 3; ++a) {
        f[a].resize(grid_.sites());
        inverse_fft_into(grid_, e_[a], f[a]);
      }
      for (std::size_t r = 0; r < regions_.size(); ++r) {
        for (std::size_t n = 0; n < region_sites_[r].size(); ++n) {
          const std::size_t s = region_sites_[r][n];
          region_e_[region_offset_[r] + n] = {f[0][s], f[1][s], f[2][s]};
        }
      }
    }
    probe_e_.clear();
    probe_b_.clear();
    if (dense) {
      for (std::size_t s : probe_sites_) probe_e_.push_back({f[0][s], f[1][s], f[2][s]});
      for (std::size_t a = 0; a < 3; ++a) inverse_fft_into(grid_, b_[a], f[a]);
      for (std::size_t s : probe_sites_) probe_b_.push_back({f[0][s], f[1][s], f[2][s]});
      return;
    }
    for (std::size_t s : probe_sites_) {
      probe_e_.push_back({site_value(e_[0], s), site_value(e_[1], s), site_value(e_[2], s)});
      probe_b_.push_back({site_value(b_[0], s), site_value(b_[1], s), site_value(b_[2], s)});
    }
  }

  void update_diagnostics(double dt) {
    const double measure = grid_.cell_volume() / static_cast<double>(grid_.sites());
    const auto m = sources_.moments(t_);
    double e2 = 0.0, b2 = 0.0, ce2 = 0.0, res2 = 0.0, rho2 = 0.0;
    for (std::size_t idx = 0; idx < nspec_; ++idx) {
      const double w = weight_[idx];
      const double kx = kx_[idx], ky = ky_[idx], kz = kz_[idx];
      const Complex ex = e_[0][idx], ey = e_[1][idx], ez = e_[2][idx];
      e2 += w * (std::norm(ex) + std::norm(ey) + std::norm(ez));
      b2 += w * (std::norm(b_[0][idx]) + std::norm(b_[1][idx]) + std::norm(b_[2][idx]));
      ce2 += w * (std::norm(ky * ez - kz * ey) + std::norm(kz * ex - kx * ez) + std::norm(kx * ey - ky * ex));
      // i k.E - rho with rho = -i k.P
      Complex kp{};
      for (std::size_t b = 0; b < m.size(); ++b) {
        kp += (kx * m[b].p.x + ky * m[b].p.y + kz * m[b].p.z) * profile_spectra_[b][idx];
      }
      res2 += w * std::norm(kx * ex + ky * ey + kz * ez + kp);
      rho2 += w * std::norm(kp);
    }
    diag_.em_energy = 0.5 * (e2 + b2) * measure;
    diag_.em_invariant = diag_.em_energy - dt * dt / 8.0 * ce2 * measure;
    const double floor = 2.0 * M_PI / grid_.length() * std::sqrt(e2 * measure);
    const double denom = std::max(std::sqrt(rho2 * measure), floor);
    diag_.gauss_residual = denom > 0.0 ? std::sqrt(res2 * measure) / denom : 0.0;
    diag_.work = work_;
  }

  Grid grid_;
  SourceSampler sources_;
  double t_;
  std::vector<Ball> regions_;
  std::size_t nspec_ = 0;
  std::vector<double> kx_, ky_, kz_, weight_;
  std::array<Spectrum, 3> e_, b_;
  std::vector<Spectrum> profile_spectra_;
  std::vector<std::vector<std::size_t>> region_sites_;
  std::vector<std::size_t> region_offset_;
  std::vector<std::array<double, 3>> region_e_;
  std::vector<double> hm_;
  double work_ = 0.0;
  std::vector<std::size_t> probe_sites_;
  std::vector<Vec3> probe_e_, probe_b_;
  std::vector<Complex> phase_;
  std::array<std::vector<double>, 3> scratch_;  // exp(2 pi i m / n)
  Diagnostics diag_;
};

/// E = -grad V of rho(t0), B = 0.
inline SimState init_state(const Grid& grid, const SourceModel& sources, double t0, std::vector<Ball> regions = {}) {
  return Simulation(grid, sources, t0, std::move(regions)).state();
}

/// One leapfrog step of a real-space state.
inline SimState step(const SimState& state, const SourceModel& sources, double dt) {
  Simulation sim(state, sources);
  sim.step(dt);
  return sim.state();
}

/// Two-run causality experiment: probe blob B with and without driver blob A.
struct FermiConfig {
  Grid grid;
  SourceBlob source_a;
  SourceBlob probe_b;
  double dt = 0.0;
  double t_end = 0.0;
  double region_radius = 0.0;
  bool enable_a = true;

  double separation() const { return norm(grid.min_image(source_a.center, probe_b.center)); }
};

inline void validate(const FermiConfig& c) {
  require_stable(c.grid, c.dt);
  validate_blob(c.source_a, c.grid);
  validate_blob(c.probe_b, c.grid);
  const double r = c.separation();
  if (!(c.t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive");
  if (c.t_end >= c.grid.length() - r) {
    throw Error(ErrorCode::WrapAroundWindowExceeded,
                "t_end = " + std::to_string(c.t_end) + " must be below L - r = " + std::to_string(c.grid.length() - r));
  }
  if (norm(c.probe_b.amplitude) > 1e-3 * norm(c.source_a.amplitude)) {
    throw Error(ErrorCode::InvalidArgument, "probe amplitude must be at most 1e-3 of the driver amplitude");
  }
  if (!(c.region_radius > 0.0) || 2.0 * c.region_radius >= r) {
    throw Error(ErrorCode::InvalidArgument, "regions must be non-empty and disjoint");
  }
}

struct FermiSample {
  double t = 0.0;
  double hm_b_with = 0.0;
  double hm_b_without = 0.0;
  double hm_a_with = 0.0;
  Vec3 e_with, e_without;  // E at x_B
  Vec3 b_with, b_without;  // B at x_B
  double gauss_with = 0.0;
  double gauss_without = 0.0;

  double hm_diff() const { return hm_b_with - hm_b_without; }
};

struct FermiResult {
  double separation = 0.0;
  double dt = 0.0;
  std::vector<FermiSample> series;
};

namespace detail {

inline std::vector<FermiSample> fermi_run(const FermiConfig& c, bool with_a, std::size_t steps, double dt) {
  SourceModel model;
  if (with_a) model.blobs.push_back(c.source_a);
  model.blobs.push_back(c.probe_b);
  std::vector<Ball> regions{{c.source_a.center, c.region_radius}, {c.probe_b.center, c.region_radius}};
  Simulation sim(c.grid, model, 0.0, regions, {c.probe_b.center});
  std::vector<FermiSample> out;
  out.reserve(steps + 1);
  auto record = [&] {
    FermiSample s;
    s.t = sim.time();
    s.hm_a_with = sim.matter_energy()[0];
    s.hm_b_with = sim.matter_energy()[1];
    s.e_with = sim.probe_e()[0];
    s.b_with = sim.probe_b()[0];
    s.gauss_with = sim.diagnostics().gauss_residual;
    out.push_back(s);
  };
  record();
  for (std::size_t n = 1; n <= steps; ++n) {
    sim.step(dt);
    record();
    out.back().t = static_cast<double>(n) * dt;
  }
  return out;
}

}  // namespace detail

/// Runs both members of the pair (concurrently when `parallel`). Steps are
/// uniform with dt' = t_end / ceil(t_end / dt) <= dt.
inline FermiResult run_fermi(const FermiConfig& c, bool parallel = false) {
  validate(c);
  const auto steps = static_cast<std::size_t>(std::ceil(c.t_end / c.dt - 1e-9));
  const double dt = c.t_end / static_cast<double>(steps);
  std::vector<FermiSample> with, without;
  if (parallel) {
    auto fut = std::async(std::launch::async, [&] { return detail::fermi_run(c, c.enable_a, steps, dt); });
    without = detail::fermi_run(c, false, steps, dt);
    with = fut.get();
  } else {
    with = detail::fermi_run(c, c.enable_a, steps, dt);
    without = detail::fermi_run(c, false, steps, dt);
  }
  FermiResult r{c.separation(), dt, {}};
  for (std::size_t n = 0; n < with.size(); ++n) {
    FermiSample s = with[n];
    s.hm_b_without = without[n].hm_b_with;
    s.e_without = without[n].e_with;
    s.b_without = without[n].b_with;
    s.gauss_without = without[n].gauss_with;
    r.series.push_back(s);
  }
  return r;
}

/// Causality summary of a Fermi run.
struct FrontAnalysis {
  double peak = 0.0;                 // max |Delta H_M^B|
  double max_before = 0.0;           // max |Delta H_M^B| for t < r - early_margin
  std::optional<double> front_time;  // first t with |Delta H_M^B| > arrival_fraction * peak
  double probe_peak = 0.0;           // same quantities for |Delta E| at x_B
  double probe_max_before = 0.0;
};

inline FrontAnalysis analyze_front(const FermiResult& r, double early_margin, double arrival_fraction) {
  FrontAnalysis a;
  for (const auto& s : r.series) {
    a.peak = std::max(a.peak, std::abs(s.hm_diff()));
    a.probe_peak = std::max(a.probe_peak, norm(s.e_with - s.e_without));
  }
  for (const auto& s : r.series) {
    if (s.t < r.separation - early_margin) {
      a.max_before = std::max(a.max_before, std::abs(s.hm_diff()));
      a.probe_max_before = std::max(a.probe_max_before, norm(s.e_with - s.e_without));
    }
    if (!a.front_time && a.peak > 0.0 && std::abs(s.hm_diff()) > arrival_fraction * a.peak) a.front_time = s.t;
  }
  return a;
}

}  // namespace gaugekit

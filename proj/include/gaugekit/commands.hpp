#pragma once

#include <openssl/evp.h>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gaugekit/config.hpp"
#include "gaugekit/field_io.hpp"
#include "gaugekit/potentials_energy.hpp"
#include "gaugekit/version.hpp"

namespace gaugekit {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool dump_fields = false;
};

/// One named pass/fail comparison. relation is "<", ">", "<=" or "in" ([lo, hi]).
struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;
  double lo = 0.0;
  double hi = 0.0;
  bool passed = false;
};

inline Check below(std::string name, double value, double tol) {
  return {std::move(name), value, "<", tol, tol, value < tol};
}
inline Check at_most(std::string name, double value, double tol) {
  return {std::move(name), value, "<=", tol, tol, value <= tol};
}
inline Check above(std::string name, double value, double tol) {
  return {std::move(name), value, ">", tol, tol, value > tol};
}
inline Check within(std::string name, double value, double lo, double hi) {
  return {std::move(name), value, "in", lo, hi, lo <= value && value <= hi};
}

struct CommandReport {
  std::string command;
  std::vector<Check> checks;
  std::vector<std::string> outputs;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return true;
  }
  const Check& check(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return c;
    }
    throw Error(ErrorCode::InvalidArgument, "no check named " + name);
  }
};

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::Io, "SHA-256 failed");
  }
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

/// CSV with a "# gaugekit <version>" first line, then a header, then rows.
/// Reals are printed with %.17g so repeated runs compare byte for byte.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out_ << "# gaugekit " << kVersion << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<Cell>& cells) {
    char buf[40];
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ",";
      if (const auto* d = std::get_if<double>(&cells[i])) {
        std::snprintf(buf, sizeof buf, "%.17g", *d);
        out_ << buf;
      } else if (const auto* n = std::get_if<long long>(&cells[i])) {
        out_ << *n;
      } else {
        out_ << std::get<std::string>(cells[i]);
      }
    }
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

namespace detail {

inline nlohmann::ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline CsvWriter open_csv(const RunOptions& opt, CommandReport& report, const std::string& name,
                          const std::vector<std::string>& header) {
  report.outputs.push_back(name);
  return CsvWriter(opt.out_dir / name, header);
}

inline void dump(const RunOptions& opt, CommandReport& report, const std::string& name, const VectorField& f) {
  write_field((opt.out_dir / name).string(), f);
  report.outputs.push_back(name);
}

// Charges for kernel checks and partitions: the configured ensemble, or a small
// dipole near the box center.
inline ScalarField check_density(const RunConfig& c, const Grid& g) {
  if (c.charges) return charge_density(g, *c.charges);
  const double h = g.spacing(), m = 0.5 * g.length();
  const Vec3 center{m, m, m};
  return charge_density(g, {{{1.0, center + Vec3{2 * h, h, 0.5 * h}}, {-1.0, center + Vec3{-2 * h, h, 0.5 * h}}}, 1.5 * h});
}

// Custom kernels are registered (adjoint-checked) on first use.
inline GaugeKernel registered(const GaugeKernel& k) {
  if (const auto* c = std::get_if<CustomKernel>(&k)) return KernelRegistry::instance().get(c->name);
  return k;
}

inline void require_kernels(const RunConfig& c) {
  if (c.kernels.empty()) throw Error(ErrorCode::Config, c.origin + ": no [kernel.<label>] sections");
}

inline const DynamicsBlock& require_dynamics(const RunConfig& c) {
  if (!c.dynamics) throw Error(ErrorCode::Config, c.origin + ": no [dynamics] section");
  return *c.dynamics;
}

// Uniform steps with dt' = t_end / ceil(t_end / dt) <= dt.
inline std::pair<std::size_t, double> uniform_steps(double t_end, double dt) {
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  return {steps, t_end / static_cast<double>(steps)};
}

}  // namespace detail

/// Convergence orders from consecutive triples of a refinement sequence.
/// A triple (k, k+1, k+2) counts only while the second difference is resolvable,
/// |r_{k+1} - r_{k+2}| > resolvable * |r_{k+2}|; later triples sit at the lattice floor.
inline std::vector<double> richardson_orders(const std::vector<int>& orders, const std::vector<double>& r,
                                             double resolvable) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 2 < r.size(); ++k) {
    const double d1 = std::abs(r[k] - r[k + 1]), d2 = std::abs(r[k + 1] - r[k + 2]);
    if (!(d2 > resolvable * std::abs(r[k + 2]))) break;
    out.push_back(std::log(d1 / d2) / std::log(static_cast<double>(orders[k + 1]) / orders[k]));
  }
  return out;
}

/// Gauss property and adjoint identity for every kernel, plus the Poincare
/// line-kernel residual against quadrature order.
inline CommandReport cmd_kernels_check(const RunConfig& c, const RunOptions& opt) {
  detail::require_kernels(c);
  CommandReport rep{"kernels-check", {}, {}, {}};
  const Grid g = c.grid();
  const KernelsCheckBlock& kc = c.kernels_check;
  const ScalarField rho = detail::check_density(c, g);
  auto csv = detail::open_csv(opt, rep, "kernels_check.csv", {"kernel", "check", "quadrature_order", "value"});
  for (const auto& [label, kernel] : c.kernels) {
    const AdjointCheck adj = check_adjoint(kernel, g, c.seed);
    csv.row({label, std::string("adjoint_relative_error"), 0LL, adj.relative_error});
    rep.checks.push_back(below(label + ".adjoint", adj.relative_error, kc.adjoint_tolerance));
    const VectorField p = polarization(kernel, rho);
    const double gauss = l2_norm(div(p) + rho) / l2_norm(rho);
    csv.row({label, std::string("gauss_residual"), 0LL, gauss});
    rep.checks.push_back(below(label + ".gauss_residual", gauss, kc.coulomb_tolerance));
    const auto* pk = std::get_if<PoincareKernel>(&kernel);
    if (!pk) continue;
    std::vector<double> r;
    for (int m : kc.orders) {
      PoincareKernel k = *pk;
      k.quadrature_order = m;
      r.push_back(line_kernel_residual(k, rho));
      csv.row({label, std::string("line_kernel_residual"), static_cast<long long>(m), r.back()});
    }
    PoincareKernel ref = *pk;
    ref.quadrature_order = kc.reference_order;
    const double r_ref = line_kernel_residual(ref, rho);
    rep.checks.push_back(below(label + ".line_residual_at_order_" + std::to_string(kc.reference_order), r_ref,
                               kc.poincare_tolerance));
    const std::vector<double> p_obs = richardson_orders(kc.orders, r, kc.resolvable_fraction);
    double worst = p_obs.empty() ? std::nan("") : *std::min_element(p_obs.begin(), p_obs.end());
    rep.checks.push_back({label + ".convergence_order", worst, ">=", kc.min_order, kc.min_order,
                          !p_obs.empty() && worst >= kc.min_order});
    rep.details[label] = {{"orders", kc.orders}, {"line_residual", r}, {"observed_orders", p_obs}};
  }
  return rep;
}

/// Helmholtz split of the configured input (or a seeded random field).
inline CommandReport cmd_decompose(const RunConfig& c, const RunOptions& opt) {
  CommandReport rep{"decompose", {}, {}, {}};
  const Grid g = c.grid();
  VectorField f = c.decompose_input.empty()
                      ? random_transverse_field(g, c.seed) + grad(random_neutral_scalar(g, c.seed + 1))
                      : read_field(c.decompose_input).vector();
  if (f.grid().n() != g.n() || f.grid().length() != g.length()) {
    throw Error(ErrorCode::Config, "decompose input grid does not match [grid]");
  }
  const HelmholtzParts parts = helmholtz_decompose(f);
  const double scale = l2_norm(f);
  const double recon = l2_norm(parts.transverse + parts.longitudinal - f) / scale;
  const double div_t = l2_norm(div(parts.transverse)) * g.spacing() / scale;
  const double curl_l = l2_norm(curl(parts.longitudinal)) * g.spacing() / scale;
  const double overlap = std::abs(inner(parts.transverse, parts.longitudinal)) / (scale * scale);
  auto csv = detail::open_csv(opt, rep, "decompose.csv", {"quantity", "value"});
  csv.row({std::string("norm_f"), scale});
  csv.row({std::string("norm_transverse"), l2_norm(parts.transverse)});
  csv.row({std::string("norm_longitudinal"), l2_norm(parts.longitudinal)});
  csv.row({std::string("reconstruction_error"), recon});
  csv.row({std::string("div_transverse"), div_t});
  csv.row({std::string("curl_longitudinal"), curl_l});
  csv.row({std::string("overlap"), overlap});
  for (const auto& [name, v] : {std::pair{"reconstruction", recon}, {"div_transverse", div_t},
                                {"curl_longitudinal", curl_l}, {"orthogonality", overlap}}) {
    rep.checks.push_back(below(name, v, 1e-12));
  }
  if (opt.dump_fields) {
    detail::dump(opt, rep, "F_T.gfk", parts.transverse);
    detail::dump(opt, rep, "F_L.gfk", parts.longitudinal);
  }
  return rep;
}

/// Assembles A for each kernel on seeded random transverse fields and checks that
/// B is unchanged; for Poincare kernels also tracks the gauge condition against order.
inline CommandReport cmd_gauge_build(const RunConfig& c, const RunOptions& opt) {
  detail::require_kernels(c);
  CommandReport rep{"gauge-build", {}, {}, {}};
  const Grid g = c.grid();
  const GaugeBuildBlock& gb = c.gauge_build;
  std::vector<GaugeKernel> kernels;
  for (const auto& e : c.kernels) kernels.push_back(detail::registered(e.kernel));
  if (gb.trials > 0) {
    auto csv = detail::open_csv(opt, rep, "gauge_build.csv", {"kernel", "trial", "curl_error"});
    std::vector<double> worst(kernels.size(), 0.0);
    for (int t = 0; t < gb.trials; ++t) {
      const VectorField a_t = random_transverse_field(g, c.seed + static_cast<std::uint64_t>(t));
      const VectorField b = curl(a_t);
      for (std::size_t k = 0; k < kernels.size(); ++k) {
        const VectorField a = assemble_vector_potential(a_t, kernels[k]);
        const double err = max_norm(curl(a) - b) / max_norm(b);
        worst[k] = std::max(worst[k], err);
        csv.row({c.kernels[k].label, static_cast<long long>(t), err});
        if (opt.dump_fields && t == 0) detail::dump(opt, rep, "A_" + c.kernels[k].label + ".gfk", a);
      }
    }
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      rep.checks.push_back(below(c.kernels[k].label + ".b_invariance", worst[k], gb.invariance_tolerance));
    }
  }
  if (!gb.orders.empty()) {
    auto csv = detail::open_csv(opt, rep, "gauge_condition.csv", {"kernel", "quadrature_order", "ratio"});
    const double width = gb.bump_width > 0.0 ? gb.bump_width : 2.0 * g.spacing();
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      const auto* pk = std::get_if<PoincareKernel>(&kernels[k]);
      if (!pk) continue;
      const std::string& label = c.kernels[k].label;
      const Vec3 center = pk->origin + gb.bump_offset;
      const Vec3 u{0.3, 0.5, -0.8};
      const auto bump = VectorField::from_function(
          g, [&](const Vec3& x) { return u * periodic_gauss3(x - center, width, g.length()).value; });
      const VectorField a_t = curl(bump);
      std::vector<double> ratio;
      for (int m : gb.orders) {
        PoincareKernel kk = *pk;
        kk.quadrature_order = m;
        ratio.push_back(gauge_condition_ratio(assemble_vector_potential(a_t, kk), kk.origin, 0.25 * g.length()));
        csv.row({label, static_cast<long long>(m), ratio.back()});
      }
      const double order =
          std::log(ratio.front() / ratio.back()) / std::log(static_cast<double>(gb.orders.back()) / gb.orders.front());
      rep.checks.push_back(below(label + ".gauge_condition", ratio.back(), gb.condition_tolerance));
      rep.checks.push_back({label + ".gauge_condition_order", order, ">=", gb.min_order, gb.min_order,
                            order >= gb.min_order});
      rep.details[label] = {{"orders", gb.orders}, {"ratio", ratio}, {"observed_order", detail::number(order)}};
    }
  }
  return rep;
}

/// Canonical energy partition of a dipole plus travelling wave for each kernel,
/// and the Parseval identity for a seeded free field.
inline CommandReport cmd_partition(const RunConfig& c, const RunOptions& opt) {
  detail::require_kernels(c);
  CommandReport rep{"partition", {}, {}, {}};
  const Grid g = c.grid();
  const PartitionBlock& pb = c.partition;
  const ScalarField rho = detail::check_density(c, g);
  const double k = 2.0 * M_PI * pb.wave_mode / g.length();
  const auto a_t = VectorField::from_function(g, [&](const Vec3& x) { return Vec3{0.0, 0.0, pb.wave_amplitude * std::cos(k * x.x)}; });
  const auto pi_t =
      VectorField::from_function(g, [&](const Vec3& x) { return Vec3{0.0, 0.0, pb.wave_amplitude * k * std::sin(k * x.x)}; });
  const VectorField e = (-1.0) * pi_t - grad(coulomb_potential(rho));
  const VectorField b = curl(a_t);
  auto csv = detail::open_csv(opt, rep, "partition.csv",
                              {"kernel", "t", "h_pi_sq", "h_cross", "h_pt_sq", "h_long", "h_mag", "h_total_em"});
  std::vector<EnergyPartition> parts;
  for (const auto& entry : c.kernels) {
    const EnergyPartition p = canonical_partition(detail::registered(entry.kernel), e, b, rho);
    parts.push_back(p);
    csv.row({entry.label, 0.0, p.h_pi_sq, p.h_cross, p.h_pt_sq, p.h_long, p.h_mag, p.h_total_em});
  }
  double total_spread = 0.0, pi_spread = 0.0, identity = 0.0;
  for (const auto& p : parts) {
    total_spread = std::max(total_spread, std::abs(p.h_total_em - parts[0].h_total_em) / parts[0].h_total_em);
    for (const auto& q : parts) pi_spread = std::max(pi_spread, std::abs(p.h_pi_sq - q.h_pi_sq) / parts[0].h_total_em);
    identity = std::max(identity, std::abs(p.h_pi_sq + p.h_cross + p.h_pt_sq - p.h_et_sq) / p.h_et_sq);
    identity = std::max(identity, std::abs(p.h_et_sq + p.h_long + p.h_mag - p.h_total_em) / p.h_total_em);
  }
  rep.checks.push_back(below("total_em_agreement", total_spread, pb.total_tolerance));
  rep.checks.push_back(below("square_completion", identity, pb.identity_tolerance));
  if (parts.size() > 1) rep.checks.push_back(above("h_pi_sq_spread", pi_spread, pb.spread_min));

  const VectorField fa = random_transverse_field(g, c.seed + 10, 1.0);
  const VectorField fpi = random_transverse_field(g, c.seed + 11, 1.0);
  const double mode_energy = mode_amplitudes(fa, fpi).energy();
  const double field_energy = free_field_energy(fa, fpi);
  rep.checks.push_back(below("parseval", std::abs(mode_energy - field_energy) / field_energy, pb.parseval_tolerance));
  rep.details["parseval"] = {{"mode_energy", mode_energy}, {"field_energy", field_energy}};
  return rep;
}

namespace detail {

struct EvolveRun {
  std::vector<Diagnostics> diagnostics;
  double dt = 0.0;
};

inline Simulation make_simulation(const RunConfig& c, const DynamicsBlock& d) {
  const Grid g = c.grid();
  if (d.initial == "free") {
    SimState s{0.0, random_transverse_field(g, c.seed), curl(random_transverse_field(g, c.seed + 1)), d.regions, {}, {}};
    return Simulation(s, c.source_model(), d.probes);
  }
  return Simulation(g, c.source_model(), 0.0, d.regions, d.probes);
}

inline EvolveRun evolve_run(const RunConfig& c, const DynamicsBlock& d, double dt_target,
                            const std::function<void(std::size_t, const Simulation&)>& on_step) {
  Simulation sim = make_simulation(c, d);
  const auto [steps, dt] = uniform_steps(d.t_end, dt_target);
  EvolveRun run{{sim.diagnostics()}, dt};
  if (on_step) on_step(0, sim);
  for (std::size_t n = 1; n <= steps; ++n) {
    sim.step(dt);
    run.diagnostics.push_back(sim.diagnostics());
    if (on_step) on_step(n, sim);
  }
  return run;
}

}  // namespace detail

/// Time evolution with per-step diagnostics, optional field dumps and the
/// conservation checks (Gauss residual, free-field drift, energy balance order).
inline CommandReport cmd_evolve(const RunConfig& c, const RunOptions& opt) {
  const DynamicsBlock& d = detail::require_dynamics(c);
  CommandReport rep{"evolve", {}, {}, {}};
  std::vector<std::string> header{"step", "t", "em_energy", "em_invariant", "gauss_residual", "work"};
  for (std::size_t r = 0; r < d.regions.size(); ++r) header.push_back("H_M_" + std::to_string(r));
  for (std::size_t p = 0; p < d.probes.size(); ++p) {
    header.push_back("abs_E_" + std::to_string(p));
    header.push_back("abs_B_" + std::to_string(p));
  }
  auto csv = detail::open_csv(opt, rep, "evolve.csv", header);
  const auto run = detail::evolve_run(c, d, d.dt, [&](std::size_t n, const Simulation& sim) {
    const Diagnostics& dg = sim.diagnostics();
    std::vector<CsvWriter::Cell> row{static_cast<long long>(n), sim.time(), dg.em_energy, dg.em_invariant,
                                     dg.gauss_residual, dg.work};
    for (double h : sim.matter_energy()) row.emplace_back(h);
    for (std::size_t p = 0; p < sim.probe_e().size(); ++p) {
      row.emplace_back(norm(sim.probe_e()[p]));
      row.emplace_back(norm(sim.probe_b()[p]));
    }
    csv.row(row);
    if (opt.dump_fields && d.dump_every > 0 && n % static_cast<std::size_t>(d.dump_every) == 0) {
      const SimState s = sim.state();
      detail::dump(opt, rep, "E_" + std::to_string(n) + ".gfk", s.e);
      detail::dump(opt, rep, "B_" + std::to_string(n) + ".gfk", s.b);
    }
  });
  double gauss = 0.0;
  for (const auto& dg : run.diagnostics) gauss = std::max(gauss, dg.gauss_residual);
  rep.checks.push_back(below("gauss_residual", gauss, d.gauss_tolerance));
  rep.details["steps"] = run.diagnostics.size() - 1;
  rep.details["dt"] = run.dt;
  if (c.sources.empty() && run.diagnostics.size() > 2) {
    // The invariant is defined from the first completed step on.
    const double h0 = run.diagnostics[1].em_invariant;
    const double drift = std::abs(run.diagnostics.back().em_invariant - h0) / h0;
    rep.checks.push_back(below("energy_drift", drift, d.drift_tolerance));
  }
  if (d.balance_check) {
    auto bcsv = detail::open_csv(opt, rep, "balance.csv", {"dt", "balance_error"});
    std::vector<double> err, dts;
    for (int level = 0; level < 3; ++level) {
      const auto r = level == 0 ? run : detail::evolve_run(c, d, d.dt / (1 << level), {});
      const Diagnostics& first = r.diagnostics.front();
      const Diagnostics& last = r.diagnostics.back();
      err.push_back(std::abs(last.em_energy - first.em_energy + last.work) / std::abs(last.work));
      dts.push_back(r.dt);
      bcsv.row({r.dt, err.back()});
    }
    for (int k = 0; k < 2; ++k) {
      const double p = std::log(err[k] / err[k + 1]) / std::log(dts[k] / dts[k + 1]);
      rep.checks.push_back(within("balance_order_" + std::to_string(k), p, d.order_min, d.order_max));
    }
    rep.details["balance_error"] = err;
  }
  return rep;
}

/// With/without pair for the two-blob causality experiment.
inline CommandReport cmd_fermi(const RunConfig& c, const RunOptions& opt) {
  if (!c.fermi) throw Error(ErrorCode::Config, c.origin + ": no [fermi] section");
  const FermiBlock& fb = *c.fermi;
  const FermiConfig fc = fermi_config(c);
  CommandReport rep{"fermi", {}, {}, {}};
  const FermiResult res = run_fermi(fc, fb.parallel);
  const double h = c.grid().spacing();
  auto csv = detail::open_csv(opt, rep, "fermi.csv",
                              {"t", "hm_b_with", "hm_b_without", "delta_hm_b", "hm_a_with", "abs_delta_E_B",
                               "abs_delta_B_B", "gauss_with", "gauss_without"});
  double gauss = 0.0;
  for (const auto& s : res.series) {
    csv.row({s.t, s.hm_b_with, s.hm_b_without, s.hm_diff(), s.hm_a_with, norm(s.e_with - s.e_without),
             norm(s.b_with - s.b_without), s.gauss_with, s.gauss_without});
    gauss = std::max({gauss, s.gauss_with, s.gauss_without});
  }
  const FrontAnalysis fa = analyze_front(res, fb.early_margin * h, fb.arrival_fraction);
  const double r = res.separation;
  rep.details["separation"] = r;
  rep.details["dt"] = res.dt;
  rep.details["peak_delta_hm_b"] = fa.peak;
  rep.details["max_before"] = fa.max_before;
  rep.details["front_time"] = fa.front_time ? nlohmann::ordered_json(*fa.front_time) : nlohmann::ordered_json("none");
  rep.details["window"] = {r - fb.early_margin * h, r + fb.late_margin * h};
  rep.checks.push_back(below("gauss_residual", gauss, c.dynamics->gauss_tolerance));
  if (!fb.enable_a) {
    rep.checks.push_back(at_most("difference_zero", fa.peak, 0.0));
    return rep;
  }
  const double ratio = fa.peak > 0.0 ? fa.max_before / fa.peak : std::nan("");
  rep.checks.push_back(below("silence_before_front", ratio, fb.silence_ratio));
  const double front = fa.front_time.value_or(std::nan(""));
  rep.checks.push_back(at_most("arrival_by_deadline", front, r + fb.late_margin * h));
  rep.checks.push_back(within("front_time_window", front, r - fb.early_margin * h, r + fb.late_margin * h));
  return rep;
}

/// Lattice probes against the retarded oracle at shared points and times.
inline CommandReport cmd_oracle_compare(const RunConfig& c, const RunOptions& opt) {
  if (!c.oracle) throw Error(ErrorCode::Config, c.origin + ": no [oracle] section");
  const DynamicsBlock& d = detail::require_dynamics(c);
  const OracleBlock& ob = *c.oracle;
  CommandReport rep{"oracle-compare", {}, {}, {}};
  const Grid g = c.grid();
  Simulation sim(g, c.source_model(), 0.0, {}, d.probes);
  std::vector<Vec3> points;
  for (std::size_t s : sim.probe_sites()) points.push_back(g.position(s));
  auto ocsv = detail::open_csv(opt, rep, "oracle.csv", {"point", "t", "Ex", "Ey", "Ez", "Bx", "By", "Bz"});
  auto ccsv = detail::open_csv(opt, rep, "oracle_compare.csv",
                               {"point", "t", "Ex_sim", "Ey_sim", "Ez_sim", "Bx_sim", "By_sim", "Bz_sim", "Ex_oracle",
                                "Ey_oracle", "Ez_oracle", "Bx_oracle", "By_oracle", "Bz_oracle"});
  const auto [steps, dt] = detail::uniform_steps(d.t_end, d.dt);
  double ne = 0.0, de = 0.0, nb = 0.0, db = 0.0;
  bool causal = true;
  for (std::size_t n = 1; n <= steps; ++n) {
    sim.step(dt);
    if (n % static_cast<std::size_t>(ob.sample_every) != 0) continue;
    RetardedQuery q{c.source_model(), points, sim.time(), g.length(), ob.spacing_per_sigma, ob.support_sigmas};
    const RetardedResult r = retarded_fields(q);
    causal = causal && r.causal;
    for (std::size_t p = 0; p < points.size(); ++p) {
      const Vec3 se = sim.probe_e()[p], sb = sim.probe_b()[p];
      const auto pi = static_cast<long long>(p);
      ocsv.row({pi, sim.time(), r.e[p].x, r.e[p].y, r.e[p].z, r.b[p].x, r.b[p].y, r.b[p].z});
      ccsv.row({pi, sim.time(), se.x, se.y, se.z, sb.x, sb.y, sb.z, r.e[p].x, r.e[p].y, r.e[p].z, r.b[p].x, r.b[p].y,
                r.b[p].z});
      ne += dot(se - r.e[p], se - r.e[p]);
      de += dot(r.e[p], r.e[p]);
      nb += dot(sb - r.b[p], sb - r.b[p]);
      db += dot(r.b[p], r.b[p]);
    }
  }
  const double err_e = de > 0.0 ? std::sqrt(ne / de) : std::nan("");
  const double err_b = db > 0.0 ? std::sqrt(nb / db) : std::nan("");
  rep.checks.push_back(below("relative_l2_E", err_e, ob.tolerance));
  rep.checks.push_back(below("relative_l2_B", err_b, ob.tolerance));
  rep.checks.push_back(at_most("oracle_causal", causal ? 0.0 : 1.0, 0.0));
  rep.details["points"] = points.size();
  rep.details["window_end"] = d.t_end;
  return rep;
}

inline const std::map<std::string, std::function<CommandReport(const RunConfig&, const RunOptions&)>>& commands() {
  static const std::map<std::string, std::function<CommandReport(const RunConfig&, const RunOptions&)>> table{
      {"kernels-check", cmd_kernels_check}, {"decompose", cmd_decompose}, {"gauge-build", cmd_gauge_build},
      {"partition", cmd_partition},         {"evolve", cmd_evolve},       {"fermi", cmd_fermi},
      {"oracle-compare", cmd_oracle_compare}};
  return table;
}

/// Writes <command>_summary.json next to the CSVs.
inline nlohmann::ordered_json write_summary(const CommandReport& rep, const RunConfig& c, const RunOptions& opt) {
  nlohmann::ordered_json j;
  j["command"] = rep.command;
  j["version"] = kVersion;
  j["config"] = c.origin;
  j["config_sha256"] = sha256_hex(c.text);
  j["seed"] = c.seed;
  j["grid"] = {{"n", c.n}, {"length", c.length}};
  j["passed"] = rep.passed();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  nlohmann::ordered_json tolerances = nlohmann::ordered_json::object();
  for (const auto& ch : rep.checks) {
    nlohmann::ordered_json e{{"name", ch.name}, {"value", detail::number(ch.value)}, {"relation", ch.relation}};
    if (ch.relation == "in") {
      e["bounds"] = {ch.lo, ch.hi};
      tolerances[ch.name] = {ch.lo, ch.hi};
    } else {
      e["threshold"] = ch.lo;
      tolerances[ch.name] = ch.lo;
    }
    e["passed"] = ch.passed;
    checks.push_back(e);
  }
  j["tolerances"] = tolerances;
  j["checks"] = checks;
  j["outputs"] = rep.outputs;
  j["details"] = rep.details;
  std::ofstream out(opt.out_dir / (rep.command + "_summary.json"), std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write summary in " + opt.out_dir.string());
  out << j.dump(2) << "\n";
  return j;
}

/// Parses nothing; runs `command` on an already parsed config and writes its summary.
inline CommandReport run_command(const std::string& command, const RunConfig& c, const RunOptions& opt) {
  const auto it = commands().find(command);
  if (it == commands().end()) throw Error(ErrorCode::Config, "unknown command '" + command + "'");
  std::filesystem::create_directories(opt.out_dir);
  CommandReport rep = it->second(c, opt);
  write_summary(rep, c, opt);
  return rep;
}

}  // namespace gaugekit

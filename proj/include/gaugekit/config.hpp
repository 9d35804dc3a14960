#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gaugekit/dynamics.hpp"
#include "gaugekit/gauge_kernels.hpp"
#include "gaugekit/retarded_oracle.hpp"

namespace gaugekit {

/// A named gauge kernel from a [kernel.<label>] section.
struct KernelEntry {
  std::string label;
  GaugeKernel kernel;
};

struct DynamicsBlock {
  double dt = 0.0;           // resolved step (dt, or dt_fraction of the stability bound)
  double t_end = 0.0;        // t_end, or steps * dt
  std::string initial = "coulomb";  // coulomb | free
  std::vector<Ball> regions;
  std::vector<Vec3> probes;
  int dump_every = 0;
  double gauss_tolerance = 1e-9;
  double drift_tolerance = 1e-11;
  bool balance_check = false;
  double order_min = 1.8;
  double order_max = 2.2;
};

struct KernelsCheckBlock {
  std::vector<int> orders{2, 4, 8, 16, 32};
  int reference_order = 32;
  double coulomb_tolerance = 1e-10;
  double poincare_tolerance = 1e-3;
  double min_order = 2.0;
  double resolvable_fraction = 1e-3;
  double adjoint_tolerance = kAdjointTolerance;
};

struct GaugeBuildBlock {
  int trials = 10;
  double invariance_tolerance = 1e-12;
  std::vector<int> orders;         // Poincare gauge-condition sequence; empty skips it
  Vec3 bump_offset{3.0, -2.0, 1.0};  // from the kernel origin, physical units
  double bump_width = 0.0;         // 0 means 2h
  double condition_tolerance = 1e-3;
  double min_order = 2.0;
};

struct PartitionBlock {
  int wave_mode = 2;
  double wave_amplitude = 0.05;
  double total_tolerance = 1e-12;
  double identity_tolerance = 1e-10;
  double spread_min = 1e-6;
  double parseval_tolerance = 1e-12;
};

struct FermiBlock {
  std::string source = "A";
  std::string probe = "B";
  double region_radius = 0.0;  // physical; 0 means 2h
  double early_margin = 3.0;   // in lattice spacings
  double late_margin = 5.0;    // in lattice spacings
  double silence_ratio = 1e-10;
  double arrival_fraction = 1e-3;
  bool enable_a = true;
  bool parallel = true;
};

struct OracleBlock {
  int sample_every = 10;
  double tolerance = 0.02;
  double spacing_per_sigma = 0.25;
  double support_sigmas = 5.0;
};

/// Fully parsed run description. `text` keeps the raw bytes for hashing.
struct RunConfig {
  std::string origin;
  std::string text;
  int n = 0;
  double length = 0.0;
  std::uint64_t seed = 1;
  std::vector<KernelEntry> kernels;
  std::vector<SourceBlob> sources;
  std::optional<ChargeEnsemble> charges;
  std::optional<DynamicsBlock> dynamics;
  KernelsCheckBlock kernels_check;
  GaugeBuildBlock gauge_build;
  PartitionBlock partition;
  std::optional<FermiBlock> fermi;
  std::optional<OracleBlock> oracle;
  std::string decompose_input;

  Grid grid() const { return Grid(n, length); }
  SourceModel source_model() const { return {sources}; }
  const SourceBlob& source(const std::string& label) const {
    for (const auto& s : sources) {
      if (s.label == label) return s;
    }
    throw Error(ErrorCode::Config, "no [source." + label + "] section");
  }
};

namespace detail {

using boost::property_tree::ptree;

[[noreturn]] inline void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::Config, where + ": " + what);
}

inline void require_known(const ptree& section, const std::string& name, const std::set<std::string>& keys) {
  for (const auto& [k, v] : section) {
    if (!keys.count(k)) config_error("[" + name + "]", "unknown key '" + k + "'");
  }
}

template <typename T>
T get(const ptree& section, const std::string& name, const std::string& key, T fallback) {
  const auto raw = section.get_optional<std::string>(key);
  if (!raw) return fallback;
  std::istringstream is(*raw);
  T value{};
  if constexpr (std::is_same_v<T, bool>) {
    std::string s;
    is >> s;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    config_error("[" + name + "]", "'" + key + "' is not a boolean");
  } else {
    is >> value;
    std::string rest;
    if (is.fail() || (is >> rest)) config_error("[" + name + "]", "'" + key + "' = '" + *raw + "' is not a number");
  }
  return value;
}

inline std::vector<double> numbers(const std::string& s, const std::string& where) {
  std::string t = s;
  for (char& c : t) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(t);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      config_error(where, "'" + tok + "' is not a number");
    }
  }
  return out;
}

// ';'-separated groups of `width` numbers.
inline std::vector<std::vector<double>> groups(const std::string& s, std::size_t width, const std::string& where) {
  std::vector<std::vector<double>> out;
  std::istringstream is(s);
  std::string part;
  while (std::getline(is, part, ';')) {
    if (part.find_first_not_of(" \t") == std::string::npos) continue;
    auto v = numbers(part, where);
    if (v.size() != width) config_error(where, "expected " + std::to_string(width) + " numbers in '" + part + "'");
    out.push_back(v);
  }
  return out;
}

inline Vec3 vec3(const ptree& section, const std::string& name, const std::string& key, const Vec3& fallback) {
  const auto raw = section.get_optional<std::string>(key);
  if (!raw) return fallback;
  const auto g = groups(*raw, 3, "[" + name + "] " + key);
  if (g.size() != 1) config_error("[" + name + "]", "'" + key + "' must be one 3-vector");
  return {g[0][0], g[0][1], g[0][2]};
}

inline std::vector<int> int_list(const ptree& section, const std::string& name, const std::string& key,
                                 std::vector<int> fallback) {
  const auto raw = section.get_optional<std::string>(key);
  if (!raw) return fallback;
  std::vector<int> out;
  for (double v : numbers(*raw, "[" + name + "] " + key)) {
    if (v != std::floor(v) || v < 1) config_error("[" + name + "]", "'" + key + "' must list positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline GaugeKernel parse_kernel(const ptree& s, const std::string& name, const Grid& g) {
  require_known(s, name, {"type", "name", "origin", "quadrature_order", "interpolation", "taper_inner", "taper_outer"});
  const std::string type = s.get<std::string>("type", "");
  if (type == "coulomb") return CoulombKernel{};
  if (type == "poincare") {
    const double c = 0.5 * g.length();
    PoincareKernel k;
    k.origin = vec3(s, name, "origin", {c, c, c});
    k.quadrature_order = get<int>(s, name, "quadrature_order", k.quadrature_order);
    k.interpolation = interpolation_from_string(s.get<std::string>("interpolation", to_string(k.interpolation)));
    k.taper_inner = get<double>(s, name, "taper_inner", k.taper_inner);
    k.taper_outer = get<double>(s, name, "taper_outer", k.taper_outer);
    PoincareOperator check(Grid(4, g.length()), k);  // validates order and taper
    return k;
  }
  if (type == "custom") {
    const std::string kname = s.get<std::string>("name", "");
    if (kname.empty()) config_error("[" + name + "]", "custom kernel needs 'name'");
    // Registration (the adjoint check) happens when a command first uses the kernel.
    if (auto k = builtin_custom_kernel(kname)) return *k;
    config_error("[" + name + "]", "no custom kernel named '" + kname + "'");
  }
  config_error("[" + name + "]", "type must be coulomb, poincare or custom, got '" + type + "'");
}

inline SourceBlob parse_source(const ptree& s, const std::string& name, const std::string& label, const Grid& g) {
  require_known(s, name, {"center", "sigma", "amplitude", "omega0", "ramp", "t_on"});
  if (!s.get_optional<std::string>("center") || !s.get_optional<std::string>("amplitude")) {
    config_error("[" + name + "]", "'center' and 'amplitude' are required");
  }
  SourceBlob b;
  b.label = label;
  b.center = vec3(s, name, "center", {});
  b.amplitude = vec3(s, name, "amplitude", {});
  b.sigma = get<double>(s, name, "sigma", 2.0 * g.spacing());
  b.omega0 = get<double>(s, name, "omega0", 0.0);
  b.ramp = get<double>(s, name, "ramp", 1.0);
  b.t_on = get<double>(s, name, "t_on", 0.0);
  validate_blob(b, g);
  return b;
}

}  // namespace detail

/// FermiConfig assembled from the [fermi], [dynamics] and source sections; validated.
inline FermiConfig fermi_config(const RunConfig& c);

/// Parses INI text. Module preconditions that can be checked statically (grid,
/// neutrality, stability bound, wrap windows) are checked here; all failures
/// throw Error(ErrorCode::Config).
inline RunConfig parse_config(const std::string& text, const std::string& origin = "<string>") {
  using detail::config_error;
  using detail::get;
  detail::ptree root;
  try {
    std::istringstream is(text);
    boost::property_tree::ini_parser::read_ini(is, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::Config, origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig c;
  c.origin = origin;
  c.text = text;
  try {
    const auto grid_section = root.get_child_optional(detail::ptree::path_type("grid", '/'));
    if (!grid_section) config_error(origin, "missing [grid]");
    detail::require_known(*grid_section, "grid", {"n", "length"});
    c.n = get<int>(*grid_section, "grid", "n", 0);
    c.length = get<double>(*grid_section, "grid", "length", 0.0);
    const Grid g = c.grid();

    for (const auto& [key, section] : root) {
      const auto dot_pos = key.find('.');
      const std::string head = key.substr(0, dot_pos);
      const std::string label = dot_pos == std::string::npos ? "" : key.substr(dot_pos + 1);
      if (!section.data().empty()) config_error(origin, "top-level key '" + key + "' outside a section");
      if (head == "grid") continue;
      if (head == "run") {
        detail::require_known(section, key, {"seed"});
        c.seed = get<std::uint64_t>(section, key, "seed", c.seed);
      } else if (head == "kernel" && !label.empty()) {
        c.kernels.push_back({label, detail::parse_kernel(section, key, g)});
      } else if (head == "source" && !label.empty()) {
        c.sources.push_back(detail::parse_source(section, key, label, g));
      } else if (head == "charges") {
        detail::require_known(section, key, {"charges", "smearing"});
        ChargeEnsemble e;
        e.smearing = get<double>(section, key, "smearing", 0.0);
        for (const auto& q : detail::groups(section.get<std::string>("charges", ""), 4, "[charges] charges")) {
          e.charges.push_back({q[0], {q[1], q[2], q[3]}});
        }
        if (e.charges.empty()) config_error("[charges]", "no charges listed");
        (void)charge_density(g, e);  // neutrality
        c.charges = e;
      } else if (head == "dynamics") {
        detail::require_known(section, key,
                              {"dt", "dt_fraction", "t_end", "steps", "initial", "regions", "probes", "dump_every",
                               "gauss_tolerance", "drift_tolerance", "balance_check", "order_min", "order_max"});
        DynamicsBlock d;
        const auto dt = section.get_optional<std::string>("dt");
        const auto frac = section.get_optional<std::string>("dt_fraction");
        if (dt && frac) config_error("[dynamics]", "give either dt or dt_fraction");
        d.dt = dt ? get<double>(section, key, "dt", 0.0) : get<double>(section, key, "dt_fraction", 0.5) * max_stable_dt(g);
        require_stable(g, d.dt);
        const auto steps = section.get_optional<std::string>("steps");
        if (steps && section.get_optional<std::string>("t_end")) config_error("[dynamics]", "give either t_end or steps");
        d.t_end = steps ? get<int>(section, key, "steps", 0) * d.dt : get<double>(section, key, "t_end", 0.0);
        if (!(d.t_end > 0.0)) config_error("[dynamics]", "t_end (or steps) must be positive");
        d.initial = section.get<std::string>("initial", d.initial);
        if (d.initial != "coulomb" && d.initial != "free") config_error("[dynamics]", "initial must be coulomb or free");
        for (const auto& r : detail::groups(section.get<std::string>("regions", ""), 4, "[dynamics] regions")) {
          if (!(r[3] > 0.0)) config_error("[dynamics]", "region radius must be positive");
          d.regions.push_back({{r[0], r[1], r[2]}, r[3]});
        }
        for (const auto& p : detail::groups(section.get<std::string>("probes", ""), 3, "[dynamics] probes")) {
          d.probes.push_back({p[0], p[1], p[2]});
        }
        d.dump_every = get<int>(section, key, "dump_every", 0);
        if (d.dump_every < 0) config_error("[dynamics]", "dump_every must be >= 0");
        d.gauss_tolerance = get<double>(section, key, "gauss_tolerance", d.gauss_tolerance);
        d.drift_tolerance = get<double>(section, key, "drift_tolerance", d.drift_tolerance);
        d.balance_check = get<bool>(section, key, "balance_check", false);
        d.order_min = get<double>(section, key, "order_min", d.order_min);
        d.order_max = get<double>(section, key, "order_max", d.order_max);
        c.dynamics = d;
      } else if (head == "kernels_check") {
        detail::require_known(section, key,
                              {"orders", "reference_order", "coulomb_tolerance", "poincare_tolerance", "min_order",
                               "resolvable_fraction", "adjoint_tolerance"});
        auto& k = c.kernels_check;
        k.orders = detail::int_list(section, key, "orders", k.orders);
        k.reference_order = get<int>(section, key, "reference_order", k.reference_order);
        k.coulomb_tolerance = get<double>(section, key, "coulomb_tolerance", k.coulomb_tolerance);
        k.poincare_tolerance = get<double>(section, key, "poincare_tolerance", k.poincare_tolerance);
        k.min_order = get<double>(section, key, "min_order", k.min_order);
        k.resolvable_fraction = get<double>(section, key, "resolvable_fraction", k.resolvable_fraction);
        k.adjoint_tolerance = get<double>(section, key, "adjoint_tolerance", k.adjoint_tolerance);
      } else if (head == "gauge_build") {
        detail::require_known(section, key,
                              {"trials", "invariance_tolerance", "orders", "bump_offset", "bump_width",
                               "condition_tolerance", "min_order"});
        auto& b = c.gauge_build;
        b.trials = get<int>(section, key, "trials", b.trials);
        b.invariance_tolerance = get<double>(section, key, "invariance_tolerance", b.invariance_tolerance);
        b.orders = detail::int_list(section, key, "orders", b.orders);
        b.bump_offset = detail::vec3(section, key, "bump_offset", b.bump_offset);
        b.bump_width = get<double>(section, key, "bump_width", b.bump_width);
        b.condition_tolerance = get<double>(section, key, "condition_tolerance", b.condition_tolerance);
        b.min_order = get<double>(section, key, "min_order", b.min_order);
      } else if (head == "partition") {
        detail::require_known(section, key,
                              {"wave_mode", "wave_amplitude", "total_tolerance", "identity_tolerance", "spread_min",
                               "parseval_tolerance"});
        auto& p = c.partition;
        p.wave_mode = get<int>(section, key, "wave_mode", p.wave_mode);
        p.wave_amplitude = get<double>(section, key, "wave_amplitude", p.wave_amplitude);
        p.total_tolerance = get<double>(section, key, "total_tolerance", p.total_tolerance);
        p.identity_tolerance = get<double>(section, key, "identity_tolerance", p.identity_tolerance);
        p.spread_min = get<double>(section, key, "spread_min", p.spread_min);
        p.parseval_tolerance = get<double>(section, key, "parseval_tolerance", p.parseval_tolerance);
        if (p.wave_mode < 1 || p.wave_mode >= c.n / 2) config_error("[partition]", "wave_mode must be in [1, n/2)");
      } else if (head == "fermi") {
        detail::require_known(section, key,
                              {"source", "probe", "region_radius", "early_margin", "late_margin", "silence_ratio",
                               "arrival_fraction", "enable_a", "parallel"});
        FermiBlock f;
        f.source = section.get<std::string>("source", f.source);
        f.probe = section.get<std::string>("probe", f.probe);
        f.region_radius = get<double>(section, key, "region_radius", 2.0 * g.spacing());
        f.early_margin = get<double>(section, key, "early_margin", f.early_margin);
        f.late_margin = get<double>(section, key, "late_margin", f.late_margin);
        f.silence_ratio = get<double>(section, key, "silence_ratio", f.silence_ratio);
        f.arrival_fraction = get<double>(section, key, "arrival_fraction", f.arrival_fraction);
        f.enable_a = get<bool>(section, key, "enable_a", f.enable_a);
        f.parallel = get<bool>(section, key, "parallel", f.parallel);
        c.fermi = f;
      } else if (head == "oracle") {
        detail::require_known(section, key, {"sample_every", "tolerance", "spacing_per_sigma", "support_sigmas"});
        OracleBlock o;
        o.sample_every = get<int>(section, key, "sample_every", o.sample_every);
        o.tolerance = get<double>(section, key, "tolerance", o.tolerance);
        o.spacing_per_sigma = get<double>(section, key, "spacing_per_sigma", o.spacing_per_sigma);
        o.support_sigmas = get<double>(section, key, "support_sigmas", o.support_sigmas);
        if (o.sample_every < 1) config_error("[oracle]", "sample_every must be >= 1");
        c.oracle = o;
      } else if (head == "decompose") {
        detail::require_known(section, key, {"input"});
        c.decompose_input = section.get<std::string>("input", "");
      } else {
        config_error(origin, "unknown section [" + key + "]");
      }
    }

    // Cross-section checks.
    if (c.fermi) {
      if (!c.dynamics) config_error("[fermi]", "needs a [dynamics] block for dt and t_end");
      (void)fermi_config(c);
    }
    if (c.oracle) {
      if (!c.dynamics || c.dynamics->probes.empty()) config_error("[oracle]", "needs [dynamics] probes");
      RetardedQuery q{c.source_model(), c.dynamics->probes, c.dynamics->t_end, c.length};
      if (c.dynamics->t_end >= c.length - max_source_distance(q)) {
        throw Error(ErrorCode::WrapAroundWindowExceeded,
                    "t_end = " + std::to_string(c.dynamics->t_end) + " reaches the first periodic image at L - d = " +
                        std::to_string(c.length - max_source_distance(q)));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, origin + ": " + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

inline FermiConfig fermi_config(const RunConfig& c) {
  if (!c.fermi || !c.dynamics) throw Error(ErrorCode::Config, "config has no [fermi] block");
  FermiConfig f{c.grid(), c.source(c.fermi->source), c.source(c.fermi->probe), c.dynamics->dt, c.dynamics->t_end,
                c.fermi->region_radius, c.fermi->enable_a};
  validate(f);
  return f;
}

}  // namespace gaugekit

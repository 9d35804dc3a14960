#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "gaugekit/cli.hpp"

using namespace gaugekit;
namespace fs = std::filesystem;

namespace {

const char* kSmallKernels = R"([run]
seed = 3

[grid]
n = 32
length = 32

[kernel.coulomb]
type = coulomb

[kernel.poincare]
type = poincare
quadrature_order = 8

[kernels_check]
orders = 2 4 8
reference_order = 8
)";

const char* kSmallFermi = R"([grid]
n = 16
length = 32

[source.A]
center = 10 16 16
sigma = 2
amplitude = 0 0 1
omega0 = 1
ramp = 1

[source.B]
center = 22 16 16
sigma = 2
amplitude = 0 0 1e-3
omega0 = 1
ramp = 1

[dynamics]
dt_fraction = 0.5
t_end = 3

[fermi]
region_radius = 2
enable_a = false
parallel = false
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gaugekit_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "gaugekit");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

ErrorCode parse_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ParseConfig, ReadsBlocksAndDefaults) {
  const RunConfig c = parse_config(kSmallKernels);
  EXPECT_EQ(c.n, 32);
  EXPECT_EQ(c.seed, 3u);
  ASSERT_EQ(c.kernels.size(), 2u);
  const auto& p = std::get<PoincareKernel>(c.kernels[1].kernel);
  EXPECT_EQ(p.quadrature_order, 8);
  EXPECT_EQ(p.origin, (Vec3{16, 16, 16}));
  EXPECT_EQ(c.kernels_check.orders, (std::vector<int>{2, 4, 8}));
}

TEST(ParseConfig, RejectsStaticallyCheckableErrors) {
  const std::string grid = "[grid]\nn = 16\nlength = 16\n";
  EXPECT_EQ(parse_error("[grid]\nn = 15\nlength = 16\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error(grid + "[grid2]\nx = 1\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error(grid + "[kernel.k]\ntype = coulomb\ncolour = red\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error(grid + "[kernel.k]\ntype = custom\nname = nope\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error(grid + "[charges]\ncharges = 1 8 8 8; -0.5 4 4 4\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error(grid + "[dynamics]\ndt = 0.5\nt_end = 1\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error(grid + "[dynamics]\ndt_fraction = 0.5\nt_end = abc\n"), ErrorCode::Config);
  EXPECT_EQ(parse_error("[run]\nseed = 1\n"), ErrorCode::Config);
}

TEST(ParseConfig, FermiWrapWindowCheckedAtParse) {
  std::string text = kSmallFermi;
  text.replace(text.find("t_end = 3"), 9, "t_end = 25");
  try {
    (void)parse_config(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("WrapAroundWindowExceeded"), std::string::npos);
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("exit");
  const fs::path good = write_file(dir, "good.ini", kSmallKernels);
  const fs::path bad = write_file(dir, "bad.ini", "[grid]\nn = 16\n");
  EXPECT_EQ(run({"kernels-check", "--config", good.string(), "--out", (dir / "ok").string()}), 0);
  EXPECT_EQ(run({"kernels-check", "--config", bad.string(), "--out", (dir / "bad").string()}), 2);
  EXPECT_EQ(run({"kernels-check", "--config", (dir / "missing.ini").string()}), 2);
  EXPECT_EQ(run({"kernels-check"}), 2);
  EXPECT_EQ(run({"no-such-command"}), 2);
}

TEST(Cli, MismatchedCustomKernelFailsNamedCheck) {
  const fs::path dir = scratch("custom");
  const fs::path cfg =
      write_file(dir, "c.ini", "[grid]\nn = 16\nlength = 16\n[kernel.bad]\ntype = custom\nname = mismatched-adjoint\n");
  std::string text;
  EXPECT_EQ(run({"kernels-check", "--config", cfg.string(), "--out", dir.string()}, &text), 1);
  EXPECT_NE(text.find("FAIL bad.adjoint"), std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "kernels-check_summary.json"));
  EXPECT_FALSE(summary["passed"].get<bool>());
}

TEST(Cli, PoincareResidualShrinksWithOrder) {
  const fs::path dir = scratch("orders");
  std::string text = kSmallKernels;
  text.replace(text.find("orders = 2 4 8"), 14, "orders = 8 64");
  const fs::path cfg = write_file(dir, "k.ini", text);
  ASSERT_EQ(run({"kernels-check", "--config", cfg.string(), "--out", dir.string()}), 1);  // no resolvable triple
  const auto summary = nlohmann::json::parse(slurp(dir / "kernels-check_summary.json"));
  const auto r = summary["details"]["poincare"]["line_residual"].get<std::vector<double>>();
  ASSERT_EQ(r.size(), 2u);
  EXPECT_LT(r[1], r[0]);
}

TEST(Cli, SummaryCarriesHashVersionAndTolerances) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const fs::path dir = scratch("summary");
  const fs::path cfg = write_file(dir, "k.ini", kSmallKernels);
  ASSERT_EQ(run({"kernels-check", "--config", cfg.string(), "--out", dir.string()}), 0);
  const auto s = nlohmann::json::parse(slurp(dir / "kernels-check_summary.json"));
  EXPECT_EQ(s["config_sha256"], sha256_hex(kSmallKernels));
  EXPECT_EQ(s["version"], kVersion);
  EXPECT_EQ(s["tolerances"]["coulomb.gauss_residual"].get<double>(), 1e-10);
  EXPECT_EQ(s["tolerances"]["poincare.line_residual_at_order_8"].get<double>(), 1e-3);
  const std::string csv = slurp(dir / "kernels_check.csv");
  EXPECT_EQ(csv.rfind(std::string("# gaugekit ") + kVersion + "\n", 0), 0u);
}

TEST(Cli, EnvironmentOverridesOut) {
  const fs::path dir = scratch("env");
  const fs::path cfg = write_file(dir, "k.ini", kSmallKernels);
  ::setenv("GAUGEKIT_OUT", (dir / "from_env").string().c_str(), 1);
  const int code = run({"kernels-check", "--config", cfg.string(), "--out", (dir / "from_flag").string()});
  ::unsetenv("GAUGEKIT_OUT");
  EXPECT_EQ(code, 0);
  EXPECT_TRUE(fs::exists(dir / "from_env" / "kernels_check.csv"));
  EXPECT_FALSE(fs::exists(dir / "from_flag"));
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_file(dir, "p.ini", std::string(kSmallKernels) + "[charges]\ncharges = 1 18 17 16; -1 14 17 16\n");
  for (const char* sub : {"a", "b"}) {
    ASSERT_EQ(run({"partition", "--config", cfg.string(), "--out", (dir / sub).string()}), 0);
  }
  EXPECT_EQ(slurp(dir / "a" / "partition.csv"), slurp(dir / "b" / "partition.csv"));
}

TEST(Cli, DisabledFermiSourceReportsNoFront) {
  const fs::path dir = scratch("fermi");
  const fs::path cfg = write_file(dir, "f.ini", kSmallFermi);
  ASSERT_EQ(run({"fermi", "--config", cfg.string(), "--out", dir.string()}), 0);
  const auto s = nlohmann::json::parse(slurp(dir / "fermi_summary.json"));
  EXPECT_EQ(s["details"]["front_time"], "none");
  EXPECT_EQ(s["details"]["peak_delta_hm_b"].get<double>(), 0.0);
}

TEST(Cli, EvolveDumpsReadableFields) {
  const fs::path dir = scratch("evolve");
  const fs::path cfg = write_file(dir, "e.ini",
                                  "[grid]\nn = 8\nlength = 8\n[source.A]\ncenter = 4 4 4\nsigma = 1\namplitude = 0 0 1\n"
                                  "omega0 = 1\n[dynamics]\ndt_fraction = 0.5\nsteps = 4\ndump_every = 2\nprobes = 6 4 4\n");
  ASSERT_EQ(run({"evolve", "--config", cfg.string(), "--out", dir.string(), "--dump-fields", "--threads", "2"}), 0);
  const FieldDump e = read_field((dir / "E_4.gfk").string());
  EXPECT_EQ(e.grid.n(), 8);
  EXPECT_EQ(e.components, 3);
  EXPECT_TRUE(fs::exists(dir / "B_2.gfk"));
  std::istringstream csv(slurp(dir / "evolve.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 2u + 5u);
}

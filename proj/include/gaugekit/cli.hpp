#pragma once

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "gaugekit/commands.hpp"

namespace gaugekit {

/// Exit codes of the command-line runner.
enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitConfigError = 2 };

/// Entry point shared by the executable and the tests. GAUGEKIT_OUT overrides --out.
inline int cli_main(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"gaugekit: gauge kernels and Maxwell dynamics on a periodic lattice"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir = ".";
  bool dump_fields = false;
  int threads = 1;
  for (const auto& [name, fn] : commands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "INI run description")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--dump-fields", dump_fields, "write GFK1 field dumps");
    sub->add_option("--threads", threads, "FFTW threads")->check(CLI::Range(1, 256));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (const char* env = std::getenv("GAUGEKIT_OUT"); env && *env) out_dir = env;
  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    set_fft_threads(threads);
    const CommandReport rep = run_command(command, config, {out_dir, dump_fields});
    for (const auto& c : rep.checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << c.value << "\n";
    out << command << ": " << (rep.passed() ? "PASS" : "FAIL") << "\n";
    return rep.passed() ? kExitPass : kExitCheckFailure;
  } catch (const Error& e) {
    err << command << ": " << e.what() << "\n";
    return e.code() == ErrorCode::Config ? kExitConfigError : kExitCheckFailure;
  }
}

}  // namespace gaugekit

// Command-line front end. Talks to the library through the C API only.
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lvgsa.h"

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("--config", a.config, "run configuration (JSON)")->required();
  cmd->add_option("--seed", a.seed, "override the configured seed");
  cmd->add_option("--out", a.out, "override the output directory");
  cmd->add_option("--threads", a.threads, "worker threads, 0 = all cores");
}

int execute(const std::string& verb, const Args& a) {
  lvgsa_session* s = nullptr;
  lvgsa_status st = lvgsa_session_from_file(a.config.c_str(), &s);
  if (st != LVGSA_OK) {
    std::fprintf(stderr, "lvgsa: %s\n", lvgsa_last_error());
    return st;
  }
  if (a.seed) lvgsa_session_set_seed(s, *a.seed);
  if (a.out) lvgsa_session_set_output_dir(s, a.out->c_str());
  if (a.threads) lvgsa_session_set_threads(s, *a.threads);

  if (verb == "run")
    st = lvgsa_run(s);
  else if (verb == "sweep")
    st = lvgsa_sweep(s);
  else
    st = lvgsa_population(s);

  std::fputs(lvgsa_session_summary(s), stdout);
  if (st != LVGSA_OK) std::fprintf(stderr, "lvgsa: %s\n", lvgsa_session_error(s));
  const std::size_t files = lvgsa_session_file_count(s);
  if (files > 0) std::printf("wrote %zu files, wall time %.2f s\n", files, lvgsa_session_wall_time(s));
  lvgsa_session_destroy(s);
  return st;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variance-based sensitivity analysis with correlated inputs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lvgsa_version()));

  Args run_args, sweep_args, pop_args;
  auto* run = app.add_subcommand("run", "analyses at the configured rho");
  auto* sweep = app.add_subcommand("sweep", "analyses over a rho grid");
  auto* pop = app.add_subcommand("population", "PBPK population simulation");
  add_common(run, run_args);
  add_common(sweep, sweep_args);
  add_common(pop, pop_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : LVGSA_ERR_CONFIG;
  }
  if (run->parsed()) return execute("run", run_args);
  if (sweep->parsed()) return execute("sweep", sweep_args);
  return execute("population", pop_args);
}

// axy: config-driven front end for the AXY gate library.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using namespace axy::cli;

int run(const std::string& command, const std::string& config_path, const std::string& out_flag,
        std::optional<std::uint64_t> seed, unsigned threads) {
  static const std::map<std::string, std::function<int(RunContext&)>> commands{
      {"solve-pulses", cmd_solve_pulses}, {"gate-scan", cmd_gate_scan},   {"optimize-time", cmd_optimize_time},
      {"qec", cmd_qec},                   {"filter", cmd_filter},         {"soft-control", cmd_soft_control},
      {"abundance", cmd_abundance}};
  RunContext ctx;
  ctx.command = command;
  ctx.file = load_config_file(config_path);
  ctx.config = parse_experiment(ctx.file.doc);
  ctx.out = out_flag.empty() ? std::filesystem::path(ctx.config.output.directory) : std::filesystem::path(out_flag);
  ctx.seed = seed;
  ctx.threads = threads == 0 ? 1 : threads;
  std::error_code ec;
  std::filesystem::create_directories(ctx.out, ec);
  if (ec) throw axy::Error(axy::ErrorKind::config, "cannot create output directory " + ctx.out.string());
  const int code = commands.at(command)(ctx);
  write_manifest(ctx);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AXY sequence compiler, gate simulator and repetition-code runner"};
  app.set_version_flag("--version", std::string(AXY_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  const std::vector<std::pair<std::string, std::string>> subcommands{
      {"solve-pulses", "solve composite-pulse positions and export the schedule"},
      {"gate-scan", "predicted and simulated gate fidelity over N or the decoupling frequency"},
      {"optimize-time", "shortest sequence reaching each fidelity target"},
      {"qec", "average fidelity of the three-qubit repetition code"},
      {"filter", "filter function of the configured sequence"},
      {"soft-control", "decoupling efficiency with Gaussian coupling profiles"},
      {"abundance", "expected number of 13C spins above coupling thresholds"}};
  std::map<std::string, CLI::Option*> seed_options;
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    seed_options[name] = sub->add_option("--seed", seed, "random seed");
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::Range(1u, 1024u));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::uint64_t> seed_flag;
  if (seed_options.at(command)->count() > 0) seed_flag = seed;
  try {
    return run(command, config_path, out_dir, seed_flag, threads);
  } catch (const axy::Error& e) {
    std::fprintf(stderr, "axy %s: %s\n", command.c_str(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "axy %s: unexpected failure: %s\n", command.c_str(), e.what());
    return 4;
  }
}

// Command-line front end: evolve, groundstate and experiment subcommands.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical divergence, 4 I/O error.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "gpsplit/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kDivergence = 3;
constexpr int kIo = 4;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  int workers = 1;
  bool paper_mode = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "YAML run configuration")->required();
  cmd->add_option("--override", o.overrides, "dotted.key=value, repeatable");
  cmd->add_option("--out", o.out, "output directory (default: output.dir)");
  cmd->add_option("--workers", o.workers, "concurrent experiment rows")->check(CLI::Range(1, 4096));
  cmd->add_flag("--paper-mode", o.paper_mode, "forbid step-size growth (fac_max = 1)");
}

int run(const Options& o, const std::string& command) {
  using namespace gpsplit;
  std::vector<std::string> overrides = o.overrides;
  if (command != "experiment") overrides.push_back("run.mode=" + command);
  const RunConfig cfg = load_config(o.config, overrides, o.paper_mode);
  if (command == "experiment" &&
      (cfg.run.mode == RunMode::evolve || cfg.run.mode == RunMode::groundstate))
    throw ConfigError("run.mode: experiment needs order_sweep, energy_longterm, "
                      "quotient_check or groundstate_then_evolve");
  const std::string out = o.out.empty() ? cfg.output.dir : o.out;
  const ExperimentSummary s = run_experiment(cfg, out, o.workers);
  std::printf("%s: %zu files in %s, %lld transforms, %.2f s\n", std::string(to_string(s.mode)).c_str(),
              s.files.size(), out.c_str(), static_cast<long long>(s.transforms), s.seconds);
  if (s.failed_rows > 0) std::printf("%d row(s) failed; see the tables\n", s.failed_rows);
  if (s.diverged) {
    std::fprintf(stderr, "diverged: %s\n", s.failure.value_or("unknown").c_str());
    return kDivergence;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splitting integrators for coupled Gross-Pitaevskii systems"};
  app.require_subcommand(1);
  Options opts;
  std::string command;
  for (const char* name : {"evolve", "groundstate", "experiment"}) {
    auto* cmd = app.add_subcommand(name, std::string("run the ") + name + " mode");
    add_common(cmd, opts);
    cmd->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    return run(opts, command);
  } catch (const gpsplit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const gpsplit::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const gpsplit::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
}

// ergraph: command-line driver for the experiments.
//
//   ergraph <figure1|eigen|degrees|sbm|tails|prune> [--config f] [--seed s]
//           [--replicas r] [--out dir] [--threads t]
//
// Settings are layered: experiment defaults, then the config file, then
// command-line flags. Exit status: 0 ok, 1 usage or configuration error,
// 2 soft tolerance failures, 3 violated hard assertions.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ergraph/ergraph.hpp"

namespace ex = ergraph::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Spectral edge experiments on sparse random graphs"};
  app.set_version_flag("--version", std::string(ex::version_string()));
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::optional<std::size_t> threads;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (u64)");
  app.add_option("--replicas", replicas, "number of replicas")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--set", overrides, "extra key=value setting, applied last");

  for (const auto& name : ex::experiment_names()) app.add_subcommand(name, "run the " + name + " experiment");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string experiment = app.get_subcommands().front()->get_name();
  ex::ExperimentConfig cfg;
  try {
    cfg = ex::default_config(experiment);
    if (!config_path.empty()) ex::apply_config_file(cfg, config_path);
    if (seed) cfg.seed = *seed;
    if (replicas) cfg.replicas = *replicas;
    if (threads) cfg.threads = *threads;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ex::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(ex::detail::trim(kv.substr(0, eq)), ex::detail::trim(kv.substr(eq + 1)));
    }
  } catch (const ex::ConfigError& e) {
    std::cerr << "ergraph: " << e.what() << '\n';
    return 1;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const ex::ExperimentResult res = ex::run_experiment(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& p : ex::write_result(out_dir, res, cfg, secs)) std::cout << p.string() << '\n';
    for (const auto& f : res.hard_failures) std::cerr << "HARD: " << f << '\n';
    for (const auto& f : res.soft_failures) std::cerr << "soft: " << f << '\n';
    return res.exit_code();
  } catch (const ex::ConfigError& e) {
    std::cerr << "ergraph: " << e.what() << '\n';
    return 1;
  } catch (const ergraph::ValidationError& e) {
    std::cerr << "ergraph: invalid input: " << e.what() << '\n';
    return 1;
  } catch (const ergraph::DomainError& e) {
    std::cerr << "ergraph: parameter out of range: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ergraph: " << e.what() << '\n';
    return 1;
  }
}

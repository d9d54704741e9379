// simulate --config <file> --out <csv> [--seed N] [--trials N] [--jobs N] [--summary]

#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "antifrag/harness.hpp"

int main(int argc, char** argv) {
  using namespace antifrag;

  CLI::App app{"Monte Carlo sweep of RIS-assisted links under reactive jamming"};
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int jobs = 1;
  bool summary = false;
  app.add_option("--config", config_path, "experiment configuration")->required();
  app.add_option("--out", out_path, "CSV output path")->required();
  app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_option("--trials", trials, "trials per grid point, overrides the config")->check(CLI::PositiveNumber);
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--summary", summary, "print antifragile regions to stdout");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::vector<SweepRecord> records;
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (trials) cfg.trials = *trials;
    cfg.validate();
    for (const auto& w : cfg.warnings()) fmt::print(stderr, "warning: {}\n", w);
    records = run_sweep(cfg, jobs);
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  } catch (const DomainError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 1;
  }

  try {
    emit_csv(records, out_path);
  } catch (const IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  if (summary) std::cout << emit_summary(records);
  return 0;
}

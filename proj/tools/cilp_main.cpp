#include <CLI11.hpp>

#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Bounds on stationary and exit distributions of Markov chains by linear programming"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  double tolerance = 0;
  bool relaxed = false;
  bool no_timing = false;

  auto* validate = app.add_subcommand("validate", "check the model assumptions on a finite horizon");
  auto* bound = app.add_subcommand("bound", "Scheme A bounds at a single r");
  auto* sweep = app.add_subcommand("sweep", "Scheme A bounds over the r schedule");
  auto* minimal = app.add_subcommand("minimal", "Scheme B lower bounds on the minimal point");

  cilp::cli::Overrides overrides;
  for (auto* sub : {validate, bound, sweep, minimal}) {
    sub->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    sub->add_option("--workers", workers, "worker threads (default: CILP_WORKERS or 1)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_option("--tolerance", tolerance, "LP feasibility tolerance")->check(CLI::PositiveNumber);
    sub->add_flag("--relaxed", relaxed, "use the slack-relaxed LP (needs b_seq)");
    sub->add_flag("--no-timing", no_timing, "omit wall-clock fields so outputs are byte-reproducible");
  }

  CLI11_PARSE(app, argc, argv);

  auto given = [&](const std::string& name) {
    for (auto* sub : app.get_subcommands())
      if (sub->count(name)) return true;
    return false;
  };
  if (given("--out")) overrides.out_dir = out;
  if (given("--workers")) overrides.workers = workers;
  if (given("--seed")) overrides.seed = seed;
  if (given("--tolerance")) overrides.tolerance = tolerance;
  overrides.relaxed = relaxed;
  overrides.no_timing = no_timing;

  const std::string command = app.get_subcommands().front()->get_name();
  return cilp::cli::run(command, config, overrides, std::cerr);
}

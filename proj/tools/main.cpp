#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "rbl/cli/commands.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("rbl");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("RBL_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  using namespace rbl::cli;

  CLI::App app{"rbl: communication-free Lloyd-based flocking simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "simulate one scenario");
  run->add_option("--scenario", run_args.scenario, "scenario JSON file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
  run->add_option("--out", run_args.out, "output directory")->required();
  run->add_option("--workers", run_args.workers, "parallel decide() workers")
      ->check(CLI::PositiveNumber);

  BatchArgs batch_args;
  auto* batch = app.add_subcommand("batch", "simulate a seed range and summarize");
  batch->add_option("--scenario", batch_args.scenario, "scenario JSON file")->required();
  batch->add_option("--seeds", batch_args.seeds, "inclusive seed range A..B")->required();
  batch->add_option("--out", batch_args.out, "output directory")->required();
  batch->add_option("--jobs", batch_args.jobs, "parallel runs");

  CheckArgs check_args;
  auto* check = app.add_subcommand("check", "re-check a stored trace for violations");
  check->add_option("--trace", check_args.trace, "trace.csv")->required();
  check->add_option("--scenario", check_args.scenario, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*run) {
    if (*seed_opt) run_args.seed = seed;
    return cmd_run(run_args, std::cout, std::cerr);
  }
  if (*batch) return cmd_batch(batch_args, std::cout, std::cerr);
  return cmd_check(check_args, std::cout, std::cerr);
}

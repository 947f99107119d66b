#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

namespace rbl::cli {

enum ExitCode : int { kExitOk = 0, kExitViolations = 1, kExitInput = 2, kExitRuntime = 3 };

struct RunArgs {
  std::filesystem::path scenario;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  int workers = 1;
};

struct BatchArgs {
  std::filesystem::path scenario;
  std::string seeds;  // "A..B", inclusive
  std::filesystem::path out;
  int jobs = 1;
};

struct CheckArgs {
  std::filesystem::path trace;
  std::filesystem::path scenario;
};

/// "A..B" with A <= B; nullopt for anything else.
std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_seed_range(const std::string& text);

/// Writes trace.csv, metrics.json, violations.json, traj.svg and the resolved
/// scenario.json into `out`. Exit 0 iff the run had no violations.
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);

/// Writes summary.json. Exit 0 iff every seed succeeded.
int cmd_batch(const BatchArgs& args, std::ostream& out, std::ostream& err);

/// Replays the safety and proximity checks on a stored trace. Exit 0 iff clean.
int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err);

}  // namespace rbl::cli

#include "rbl/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <tuple>

#include "rbl/cli/scenario_file.hpp"
#include "rbl/cli/trace_io.hpp"
#include "rbl/simulator.hpp"

namespace rbl::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
  return v;
}

void print_violations(std::ostream& out, const std::vector<Violation>& vs, double tick_dt) {
  if (vs.empty()) {
    out << "no violations\n";
    return;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-16s %5s %5s %10s %10s %10s %8s\n", "type", "a", "b", "t_start",
                "t_end", "distance", "limit");
  out << buf;
  for (const auto& v : vs) {
    std::snprintf(buf, sizeof buf, "%-16s %5d %5d %10.2f %10.2f %10.4f %8.3f\n", to_string(v.type),
                  v.a, v.b, static_cast<double>(v.tick_start) * tick_dt,
                  static_cast<double>(v.tick_end) * tick_dt, v.worst_distance, v.limit);
    out << buf;
  }
  out << vs.size() << " violation interval(s)\n";
}

}  // namespace

std::optional<std::pair<std::uint64_t, std::uint64_t>> parse_seed_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    auto one = parse_u64(text);
    if (!one) return std::nullopt;
    return std::pair{*one, *one};
  }
  auto a = parse_u64(std::string_view(text).substr(0, dots));
  auto b = parse_u64(std::string_view(text).substr(dots + 2));
  if (!a || !b || *b < *a) return std::nullopt;
  return std::pair{*a, *b};
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Scenario base = load_scenario(args.scenario);
    const std::uint64_t seed = args.seed.value_or(base.seed);
    const Scenario scenario = base.resolved(seed);
    scenario.validate();
    spdlog::info("running '{}' with seed {} ({} agents, {} obstacles)", scenario.name, seed,
                 scenario.agents.size(), scenario.obstacles.size());

    RunOptions opt;
    opt.workers = args.workers;
    const TraceReport trace = run(scenario, opt);
    const RunMetrics m = run_metrics(trace, seed);

    fs::create_directories(args.out);
    {
      std::ofstream csv(args.out / "trace.csv", std::ios::binary);
      if (!csv) throw std::runtime_error("cannot write " + (args.out / "trace.csv").string());
      write_trace_csv(csv, trace);
    }
    write_file(args.out / "metrics.json", metrics_json(trace, m));
    write_file(args.out / "violations.json", violations_json(trace.violations, trace.tick_dt));
    write_file(args.out / "traj.svg", trajectory_svg(trace, scenario));
    write_file(args.out / "scenario.json", dump_scenario(scenario));

    out << "seed " << seed << ": " << (m.success ? "success" : "failure");
    if (m.time) out << ", time " << *m.time << " s";
    out << ", " << trace.violations.size() << " violation interval(s)\n";
    return trace.violations.empty() ? kExitOk : kExitViolations;
  } catch (const ScenarioParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_batch(const BatchArgs& args, std::ostream& out, std::ostream& err) {
  const auto range = parse_seed_range(args.seeds);
  if (!range) {
    err << "error: --seeds expects a non-empty range A..B\n";
    return kExitInput;
  }
  if (args.jobs < 1) {
    err << "error: --jobs must be >= 1\n";
    return kExitInput;
  }
  try {
    const Scenario scenario = load_scenario(args.scenario);
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t s = range->first;; ++s) {
      seeds.push_back(s);
      if (s == range->second) break;
    }
    spdlog::info("batch '{}' over {} seeds with {} job(s)", scenario.name, seeds.size(), args.jobs);
    const auto runs = run_batch(scenario, seeds, args.jobs);
    const BatchSummary summary = metrics(runs);

    fs::create_directories(args.out);
    write_file(args.out / "summary.json",
               summary_json(scenario.name, range->first, range->second, runs, summary));

    out << "SR " << summary.success_rate << " (" << summary.successes << "/" << summary.runs << ")";
    if (summary.avg_time) out << ", avg time " << *summary.avg_time << " s";
    out << "\n";
    return summary.successes == summary.runs ? kExitOk : kExitViolations;
  } catch (const ScenarioParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const Scenario loaded = load_scenario(args.scenario);
    const Scenario scenario = loaded.resolved(loaded.seed);
    std::ifstream in(args.trace, std::ios::binary);
    if (!in) {
      err << "error: cannot open " << args.trace.string() << "\n";
      return kExitInput;
    }
    const TraceReport trace = read_trace_csv(in, scenario.tick);
    auto found = check_safety(trace, scenario);
    const auto prox = check_proximity(trace, scenario);
    found.insert(found.end(), prox.begin(), prox.end());
    // Same order as the simulator's own list.
    std::sort(found.begin(), found.end(), [](const Violation& x, const Violation& y) {
      return std::tuple(x.tick_start, int(x.type), x.a, x.b) <
             std::tuple(y.tick_start, int(y.type), y.a, y.b);
    });
    print_violations(out, found, scenario.tick);
    return found.empty() ? kExitOk : kExitViolations;
  } catch (const ScenarioParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const TraceFormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace rbl::cli

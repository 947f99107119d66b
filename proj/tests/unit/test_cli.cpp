#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rbl/cli/commands.hpp"
#include "rbl/cli/scenario_file.hpp"
#include "rbl/cli/trace_io.hpp"

using namespace rbl;
using namespace rbl::cli;
namespace fs = std::filesystem;

namespace {

Scenario small_flock() {
  FlockParams p;
  p.rows = 1;
  p.cols = 2;
  p.spacing = 3.0;
  p.travel = {6, 0};
  p.gamma = 8.0;
  auto s = grid_flock(p);
  s.name = "pair";
  s.noise.bound = 0.2;
  s.duration_max = 4.0;
  s.seed = 3;
  return s;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("rbl_cli_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("scenario documents round-trip") {
  auto s = small_flock();
  s.obstacles.push_back({{2, 4}, 0.2});
  s.agents[1].config.d_u_measurement = 0.75;
  s.agents[0].config.adapt_params.turn_sign = TurnSign::left;
  const std::string text = dump_scenario(s);
  const Scenario back = parse_scenario(text);
  CHECK(dump_scenario(back) == text);
  CHECK(back.agents.size() == 2);
  CHECK(*back.agents[1].config.d_u_measurement == 0.75);
  CHECK_FALSE(back.agents[0].config.d_u_measurement.has_value());
  CHECK(back.agents[0].config.adapt_params.turn_sign == TurnSign::left);
}

TEST_CASE("scenario errors name the field") {
  auto doc = nlohmann::json::parse(dump_scenario(small_flock()));
  auto missing = doc;
  missing.erase("gamma_matrix");
  try {
    parse_scenario(missing.dump());
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(std::string(e.what()).find("gamma_matrix") != std::string::npos);
  }
  auto unknown = doc;
  unknown["agents"][0]["speed"] = 3;
  try {
    parse_scenario(unknown.dump());
    FAIL("expected a parse error");
  } catch (const ScenarioParseError& e) {
    CHECK(std::string(e.what()).find("speed") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_scenario("{ \"name\": "), ScenarioParseError);

  TempDir dir;
  spit(dir.path / "bad.json", missing.dump());
  std::ostringstream out, err;
  CHECK(cmd_run({dir.path / "bad.json", std::nullopt, dir.path / "o", 1}, out, err) == kExitInput);
  CHECK(err.str().find("gamma_matrix") != std::string::npos);
}

TEST_CASE("seed ranges") {
  CHECK(parse_seed_range("1..10") == std::pair<std::uint64_t, std::uint64_t>{1, 10});
  CHECK(parse_seed_range("4..4").has_value());
  CHECK_FALSE(parse_seed_range("5..4").has_value());
  CHECK_FALSE(parse_seed_range("1-3").has_value());
  CHECK_FALSE(parse_seed_range("").has_value());
  TempDir dir;
  spit(dir.path / "s.json", dump_scenario(small_flock()));
  std::ostringstream out, err;
  CHECK(cmd_batch({dir.path / "s.json", "9..2", dir.path / "o", 1}, out, err) == kExitInput);
}

TEST_CASE("run writes its outputs and the seed changes the trace") {
  TempDir dir;
  spit(dir.path / "s.json", dump_scenario(small_flock()));
  std::ostringstream out, err;
  CHECK(cmd_run({dir.path / "s.json", 3, dir.path / "a", 1}, out, err) == kExitOk);
  CHECK(cmd_run({dir.path / "s.json", 4, dir.path / "b", 1}, out, err) == kExitOk);
  for (const char* f : {"trace.csv", "metrics.json", "violations.json", "traj.svg", "scenario.json"}) {
    CHECK(fs::exists(dir.path / "a" / f));
  }
  const auto a = slurp(dir.path / "a" / "trace.csv");
  const auto b = slurp(dir.path / "b" / "trace.csv");
  CHECK(a != b);
  CHECK(a.substr(0, a.find('\n')) == kTraceHeader);
  CHECK(b.substr(0, b.find('\n')) == kTraceHeader);
  const auto metrics = nlohmann::json::parse(slurp(dir.path / "a" / "metrics.json"));
  CHECK(metrics["seed"] == 3);

  const auto svg = slurp(dir.path / "a" / "traj.svg");
  std::size_t polylines = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) {
    ++polylines;
  }
  CHECK(polylines == 2);
}

TEST_CASE("stored trace replays to the in-memory violations") {
  auto s = small_flock();
  s.gamma = {{0, 3.5}, {3.5, 0}};  // tight enough to be broken while moving
  s.agents[1].config.goal = {3, 2.0};
  s.agents[0].config.goal = {6, -2.0};
  s.duration_max = 6.0;
  const auto trace = run(s);
  std::stringstream csv;
  write_trace_csv(csv, trace);
  const auto back = read_trace_csv(csv, s.tick);
  REQUIRE(back.records.size() == trace.records.size());

  auto replayed = check_safety(back, s);
  const auto prox = check_proximity(back, s);
  replayed.insert(replayed.end(), prox.begin(), prox.end());
  std::sort(replayed.begin(), replayed.end(), [](const Violation& x, const Violation& y) {
    return std::tuple(x.tick_start, int(x.type), x.a, x.b) < std::tuple(y.tick_start, int(y.type), y.a, y.b);
  });
  REQUIRE(replayed.size() == trace.violations.size());
  for (std::size_t k = 0; k < replayed.size(); ++k) {
    CHECK(replayed[k].type == trace.violations[k].type);
    CHECK(replayed[k].tick_start == trace.violations[k].tick_start);
    CHECK(replayed[k].tick_end == trace.violations[k].tick_end);
    CHECK(replayed[k].worst_distance == doctest::Approx(trace.violations[k].worst_distance).epsilon(1e-5));
  }
}

TEST_CASE("check command exit codes") {
  TempDir dir;
  auto s = small_flock();
  spit(dir.path / "s.json", dump_scenario(s));
  std::ostringstream out, err;

  const std::string head = std::string(kTraceHeader) + "\n";
  spit(dir.path / "clean.csv", head +
                                   "0.000000,0,0.000000,0.000000,0,0,0.15,1\n"
                                   "0.000000,1,3.000000,0.000000,0,0,0.15,1\n"
                                   "0.010000,0,0.010000,0.000000,0,0,0.15,1\n"
                                   "0.010000,1,3.010000,0.000000,0,0,0.15,1\n");
  CHECK(cmd_check({dir.path / "clean.csv", dir.path / "s.json"}, out, err) == kExitOk);

  spit(dir.path / "bad.csv", head +
                                 "0.000000,0,0.000000,0.000000,0,0,0.15,1\n"
                                 "0.000000,1,0.300000,0.000000,0,0,0.15,1\n");
  CHECK(cmd_check({dir.path / "bad.csv", dir.path / "s.json"}, out, err) == kExitViolations);

  spit(dir.path / "schema.csv", "t,agent,x,y\n0,0,0,0\n");
  CHECK(cmd_check({dir.path / "schema.csv", dir.path / "s.json"}, out, err) == kExitInput);
  spit(dir.path / "cols.csv", head + "0.0,0,1.0\n");
  CHECK(cmd_check({dir.path / "cols.csv", dir.path / "s.json"}, out, err) == kExitInput);
  CHECK(cmd_check({dir.path / "missing.csv", dir.path / "s.json"}, out, err) == kExitInput);
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rbl/agent.hpp"

namespace rbl {

struct Obstacle {
  Point2 center;
  double radius = 0.15;
};

enum class LambdaMode { saturate, random };
enum class ObstacleSensing { circle, closest_point };

struct NoiseConfig {
  double bound = 0.0;  // radial error bound in meters; 0 disables noise
  LambdaMode lambda_mode = LambdaMode::saturate;
  double lambda_random_max = 20.0;  // upper end of the uniform draw in random mode
};

struct ForestRegion {
  Point2 min;
  Point2 max;
};

/// Random obstacle field materialized at run start.
struct ForestSpec {
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  ForestRegion region;
  int count = 0;
  double radius = 0.15;
  double min_clearance = 1.0;  // between obstacle centers and from every start/goal
};

struct AgentSpec {
  Point2 start;
  AgentConfig config;  // `proximity` is filled from the scenario matrices
};

struct Scenario {
  std::string name;
  std::vector<AgentSpec> agents;
  std::vector<Obstacle> obstacles;
  std::optional<ForestSpec> forest;  // appended to `obstacles` by resolved()
  std::vector<std::vector<bool>> adjacency;
  std::vector<std::vector<double>> gamma;
  NoiseConfig noise;
  double disturbance_bound = 0.0;  // m/s, tracking disturbance magnitude
  ObstacleSensing obstacle_sensing = ObstacleSensing::circle;
  double closest_point_radius = 0.05;
  double duration_max = 120.0;
  double goal_tolerance = 0.5;
  double tick = 0.01;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the first broken invariant.
  void validate() const;
  /// Copy with the forest generated for `seed` and `seed` stored; no forest left.
  Scenario resolved(std::uint64_t seed) const;
  /// Copy of the agent config with the proximity map taken from the matrices.
  AgentConfig agent_config(std::size_t i) const;
  double safety_limit(std::size_t i, std::size_t j) const;
  double obstacle_limit(std::size_t i, std::size_t k) const;
};

struct TraceRecord {
  std::int64_t tick = 0;
  int agent = 0;
  Point2 position;
  Vec2 cmd;
  double beta = 0.0;
  double clearance = 0.0;
};

enum class ViolationType { safety_robot, safety_obstacle, proximity };

const char* to_string(ViolationType t);
std::optional<ViolationType> violation_type_from_string(const std::string& s);

/// Maximal run of consecutive ticks on which one pair broke one constraint.
struct Violation {
  ViolationType type = ViolationType::safety_robot;
  int a = 0;  // agent
  int b = 0;  // agent, or obstacle index for safety_obstacle
  std::int64_t tick_start = 0;
  std::int64_t tick_end = 0;
  double worst_distance = 0.0;  // min for safety, max for proximity
  double limit = 0.0;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Checks true positions tick by tick and merges consecutive hits into intervals.
class ViolationTracker {
 public:
  explicit ViolationTracker(const Scenario& scenario);
  void observe(std::int64_t tick, const std::vector<Point2>& positions);
  /// Closes open intervals; call once after the last tick.
  std::vector<Violation> finish();
  double min_pair_distance() const { return min_pair_; }

 private:
  struct Open {
    Violation v;
    std::int64_t last_tick;
  };
  void hit(ViolationType type, int a, int b, std::int64_t tick, double dist, double limit);

  const Scenario* scenario_;
  std::vector<Open> open_;
  std::vector<Violation> closed_;
  double min_pair_ = 1e300;
};

struct TraceReport {
  double tick_dt = 0.01;
  std::int64_t ticks = 0;  // last simulated tick
  std::vector<TraceRecord> records;  // empty when recording is off
  std::vector<Violation> violations;
  std::vector<std::optional<double>> goal_times;
  int decide_failures = 0;
  double avg_speed = 0.0;
  double max_speed = 0.0;
  double min_pair_distance = 0.0;
  bool all_arrived = false;
  bool success = false;
};

struct RunOptions {
  int workers = 1;            // parallel decide() calls inside one tick
  bool record_trace = true;
  std::optional<std::uint64_t> seed;  // overrides scenario.seed
};

/// Runs one scenario to completion. Deterministic in (scenario, seed),
/// independent of `workers`. A forest, if any, is generated first.
TraceReport run(const Scenario& scenario, const RunOptions& options = {});

/// Safety violations recomputed from stored trace records.
std::vector<Violation> check_safety(const TraceReport& trace, const Scenario& scenario);
/// Proximity violations recomputed from stored trace records.
std::vector<Violation> check_proximity(const TraceReport& trace, const Scenario& scenario);

struct RunMetrics {
  std::uint64_t seed = 0;
  bool success = false;
  std::optional<double> time;  // latest goal time, set when every agent arrived
  double avg_speed = 0.0;
  double max_speed = 0.0;
  double min_pair_distance = 0.0;
  int safety_violations = 0;
  int proximity_violations = 0;
  int decide_failures = 0;
};

RunMetrics run_metrics(const TraceReport& trace, std::uint64_t seed);

struct BatchSummary {
  int runs = 0;
  int successes = 0;
  double success_rate = 0.0;
  std::optional<double> avg_time;  // over successful runs only
  double avg_speed = 0.0;
  double max_speed = 0.0;
  double min_pair_distance = 0.0;
};

BatchSummary metrics(const std::vector<RunMetrics>& runs);

/// Runs seeds in parallel with up to `jobs` workers; results in seed order.
std::vector<RunMetrics> run_batch(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                                  int jobs = 1);

/// Rejection-sampled circular obstacles with pairwise center distance and
/// distance to every keep-out point of at least `min_clearance`.
/// Throws std::runtime_error if the density cannot be reached.
std::vector<Obstacle> generate_forest(std::uint64_t seed, ForestRegion region, int count,
                                      double radius, double min_clearance,
                                      const std::vector<Point2>& keep_out = {});

/// Symmetric 4-neighbour adjacency for agents laid out row by row.
std::vector<std::vector<bool>> grid_adjacency(int rows, int cols);

struct FlockParams {
  int rows = 3;
  int cols = 3;
  double spacing = 2.5;
  Point2 origin;           // first agent start
  Vec2 travel{40.0, 0.0};  // goal offset shared by every agent
  double gamma = 10.0;
  AgentConfig agent;       // template; goal is overwritten per agent
};

/// Agents on a rows x cols lattice (rows along y) with grid proximity links.
Scenario grid_flock(const FlockParams& params);

}  // namespace rbl

#include "rbl/simulator.hpp"

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

namespace rbl {

namespace {

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

std::string pair_name(std::size_t i, std::size_t j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

std::int64_t period_ticks(double period, double tick) {
  const double ratio = period / tick;
  const auto n = static_cast<std::int64_t>(std::llround(ratio));
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6) {
    throw std::invalid_argument("scenario: control_period must be a positive multiple of tick");
  }
  return n;
}

}  // namespace

const char* to_string(ViolationType t) {
  switch (t) {
    case ViolationType::safety_robot: return "safety_robot";
    case ViolationType::safety_obstacle: return "safety_obstacle";
    case ViolationType::proximity: return "proximity";
  }
  return "?";
}

std::optional<ViolationType> violation_type_from_string(const std::string& s) {
  if (s == "safety_robot") return ViolationType::safety_robot;
  if (s == "safety_obstacle") return ViolationType::safety_obstacle;
  if (s == "proximity") return ViolationType::proximity;
  return std::nullopt;
}

void Scenario::validate() const {
  const std::size_t n = agents.size();
  if (n == 0) throw std::invalid_argument("scenario: no agents");
  if (!(tick > 0.0)) throw std::invalid_argument("scenario: tick must be > 0");
  if (!(duration_max > 0.0)) throw std::invalid_argument("scenario: duration_max must be > 0");
  if (!(goal_tolerance > 0.0)) throw std::invalid_argument("scenario: goal_tolerance must be > 0");
  if (!(noise.bound >= 0.0)) throw std::invalid_argument("scenario: noise bound must be >= 0");
  if (!(noise.lambda_random_max >= 0.0)) {
    throw std::invalid_argument("scenario: lambda_random_max must be >= 0");
  }
  if (!(disturbance_bound >= 0.0)) throw std::invalid_argument("scenario: disturbance_bound must be >= 0");
  if (!(closest_point_radius >= 0.0)) {
    throw std::invalid_argument("scenario: closest_point_radius must be >= 0");
  }
  if (forest) {
    if (forest->count < 0) throw std::invalid_argument("scenario: forest count must be >= 0");
    if (!(forest->radius > 0.0)) throw std::invalid_argument("scenario: forest radius must be > 0");
    if (!(forest->region.max.x > forest->region.min.x && forest->region.max.y > forest->region.min.y)) {
      throw std::invalid_argument("scenario: forest region is empty");
    }
    for (const auto& a : agents) {
      if (forest->min_clearance < 2.0 * (a.config.delta + forest->radius)) {
        throw std::invalid_argument(
            "scenario: forest min_clearance must be at least twice the agent-obstacle combined radius");
      }
    }
  }
  if (adjacency.size() != n || gamma.size() != n) {
    throw std::invalid_argument("scenario: adjacency and gamma_matrix must be N x N");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency[i].size() != n || gamma[i].size() != n) {
      throw std::invalid_argument("scenario: adjacency and gamma_matrix must be N x N");
    }
    if (adjacency[i][i]) throw std::invalid_argument("scenario: adjacency diagonal must be zero");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& cfg = agents[i].config;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("scenario: agent " + std::to_string(i) + ": " + e.what());
    }
    period_ticks(cfg.control_period, tick);
    if (disturbance_bound * cfg.control_period > cfg.d_u_track * (1.0 + 1e-12)) {
      throw std::invalid_argument("scenario: agent " + std::to_string(i) +
                                  ": disturbance_bound * control_period exceeds d_u_track");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (adjacency[i][j] != adjacency[j][i]) {
        throw std::invalid_argument("scenario: adjacency not symmetric at " + pair_name(i, j));
      }
      if (gamma[i][j] != gamma[j][i]) {
        throw std::invalid_argument("scenario: gamma_matrix not symmetric at " + pair_name(i, j));
      }
      if (j <= i) continue;
      const double d = distance(agents[i].start, agents[j].start);
      if (d < 2.0 * safety_limit(i, j)) {
        throw std::invalid_argument("scenario: starts too close for pair " + pair_name(i, j));
      }
      if (adjacency[i][j]) {
        if (!(gamma[i][j] > 2.0 * safety_limit(i, j))) {
          throw std::invalid_argument("scenario: gamma must exceed twice the combined radius for " +
                                      pair_name(i, j));
        }
        if (d > gamma[i][j]) {
          throw std::invalid_argument("scenario: adjacent pair " + pair_name(i, j) +
                                      " starts beyond gamma");
        }
      }
    }
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      if (!(obstacles[k].radius > 0.0)) throw std::invalid_argument("scenario: obstacle radius must be > 0");
      if (distance(agents[i].start, obstacles[k].center) < 2.0 * obstacle_limit(i, k)) {
        throw std::invalid_argument("scenario: agent " + std::to_string(i) +
                                    " starts too close to obstacle " + std::to_string(k));
      }
    }
  }
}

Scenario Scenario::resolved(std::uint64_t run_seed) const {
  Scenario out = *this;
  out.seed = run_seed;
  if (forest) {
    std::vector<Point2> keep_out;
    for (const auto& a : agents) {
      keep_out.push_back(a.start);
      keep_out.push_back(a.config.goal);
    }
    const auto trees = generate_forest(forest->seed.value_or(run_seed), forest->region,
                                       forest->count, forest->radius, forest->min_clearance,
                                       keep_out);
    out.obstacles.insert(out.obstacles.end(), trees.begin(), trees.end());
    out.forest.reset();
  }
  return out;
}

AgentConfig Scenario::agent_config(std::size_t i) const {
  AgentConfig cfg = agents.at(i).config;
  cfg.proximity.clear();
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (adjacency[i][j]) cfg.proximity[static_cast<int>(j)] = gamma[i][j];
  }
  return cfg;
}

double Scenario::safety_limit(std::size_t i, std::size_t j) const {
  return agents[i].config.delta + agents[j].config.delta;
}

double Scenario::obstacle_limit(std::size_t i, std::size_t k) const {
  return agents[i].config.delta + obstacles[k].radius;
}

ViolationTracker::ViolationTracker(const Scenario& scenario) : scenario_(&scenario) {}

void ViolationTracker::hit(ViolationType type, int a, int b, std::int64_t tick, double dist,
                           double limit) {
  for (auto& o : open_) {
    if (o.v.type == type && o.v.a == a && o.v.b == b && o.last_tick == tick - 1) {
      o.last_tick = tick;
      o.v.tick_end = tick;
      o.v.worst_distance = type == ViolationType::proximity ? std::max(o.v.worst_distance, dist)
                                                            : std::min(o.v.worst_distance, dist);
      return;
    }
  }
  open_.push_back({Violation{type, a, b, tick, tick, dist, limit}, tick});
}

void ViolationTracker::observe(std::int64_t tick, const std::vector<Point2>& positions) {
  const Scenario& s = *scenario_;
  const std::size_t n = positions.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(positions[i], positions[j]);
      min_pair_ = std::min(min_pair_, d);
      const double lim = s.safety_limit(i, j);
      if (d < lim) hit(ViolationType::safety_robot, int(i), int(j), tick, d, lim);
      if (s.adjacency[i][j] && d > s.gamma[i][j]) {
        hit(ViolationType::proximity, int(i), int(j), tick, d, s.gamma[i][j]);
      }
    }
    for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
      const double d = distance(positions[i], s.obstacles[k].center);
      const double lim = s.obstacle_limit(i, k);
      if (d < lim) hit(ViolationType::safety_obstacle, int(i), int(k), tick, d, lim);
    }
  }
  // Intervals not extended on this tick are finished.
  auto stale = std::stable_partition(open_.begin(), open_.end(),
                                     [tick](const Open& o) { return o.last_tick == tick; });
  for (auto it = stale; it != open_.end(); ++it) closed_.push_back(it->v);
  open_.erase(stale, open_.end());
}

std::vector<Violation> ViolationTracker::finish() {
  for (const auto& o : open_) closed_.push_back(o.v);
  open_.clear();
  std::vector<Violation> out = std::move(closed_);
  closed_.clear();
  std::sort(out.begin(), out.end(), [](const Violation& x, const Violation& y) {
    return std::tuple(x.tick_start, int(x.type), x.a, x.b) <
           std::tuple(y.tick_start, int(y.type), y.a, y.b);
  });
  return out;
}

namespace {

struct AgentRuntime {
  AgentConfig cfg;
  KinematicState kin;
  AdaptiveState adapt;
  Vec2 cmd;
  Vec2 disturbance;
  double clearance = 0.0;
  std::int64_t period = 1;
  std::int64_t phase = 0;
  std::mt19937_64 sense_rng;
  std::mt19937_64 disturb_rng;
  std::optional<double> goal_time;
};

struct StepResult {
  std::optional<Decision> decision;
};

std::vector<Measurement> sense(const Scenario& s, std::size_t i, const std::vector<Point2>& pos,
                               const AgentConfig& cfg, std::mt19937_64& rng) {
  const double range = cfg.cell_params.sensing_range();
  const Point2 p = pos[i];
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto noisy = [&](Point2 q, Measurement& m) {
    if (s.noise.bound > 0.0) {
      const double r = s.noise.bound * unit(rng);
      const double th = 2.0 * std::numbers::pi * unit(rng);
      q += Vec2{r * std::cos(th), r * std::sin(th)};
    }
    if (s.noise.lambda_mode == LambdaMode::random) {
      m.lambda_max = s.noise.lambda_random_max * unit(rng);
    } else if (cfg.k_sigma > 0.0) {
      const double sigma = s.noise.bound / cfg.k_sigma;
      m.lambda_max = sigma * sigma;
    }
    m.position = q;
  };

  std::vector<Measurement> out;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    if (j == i) continue;
    const bool constrained = cfg.proximity.count(static_cast<int>(j)) > 0;
    if (!constrained && distance(p, pos[j]) > range) continue;
    Measurement m;
    m.target_id = static_cast<int>(j);
    m.kind = EntityKind::robot;
    m.radius = s.agents[j].config.delta;
    noisy(pos[j], m);
    out.push_back(m);
  }
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    const Obstacle& o = s.obstacles[k];
    Point2 q = o.center;
    double radius = o.radius;
    if (s.obstacle_sensing == ObstacleSensing::closest_point) {
      const Vec2 rel = p - o.center;
      const double d = norm(rel);
      if (d > 0.0) q = o.center + (o.radius / d) * rel;
      radius = s.closest_point_radius;
    }
    if (distance(p, q) > range) continue;
    Measurement m;
    m.target_id = static_cast<int>(pos.size() + k);
    m.kind = EntityKind::obstacle;
    m.radius = radius;
    noisy(q, m);
    out.push_back(m);
  }
  return out;
}

}  // namespace

TraceReport run(const Scenario& input, const RunOptions& options) {
  const std::uint64_t seed = options.seed.value_or(input.seed);
  const Scenario scenario = input.resolved(seed);
  scenario.validate();
  const std::size_t n = scenario.agents.size();
  const double dt = scenario.tick;

  std::mt19937_64 master = make_stream(seed, 0xA5A5, 0);
  std::vector<AgentRuntime> agents;
  agents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    AgentRuntime a;
    a.cfg = scenario.agent_config(i);
    a.kin = {scenario.agents[i].start, {}};
    a.adapt = {a.cfg.adapt_params.beta_D, a.cfg.goal, false};
    a.period = period_ticks(a.cfg.control_period, dt);
    a.phase = std::uniform_int_distribution<std::int64_t>(0, a.period - 1)(master);
    a.sense_rng = make_stream(seed, i, 1);
    a.disturb_rng = make_stream(seed, i, 2);
    agents.push_back(std::move(a));
  }

  TraceReport report;
  report.tick_dt = dt;
  ViolationTracker tracker(scenario);
  std::vector<Point2> positions(n);
  std::vector<std::size_t> firing;
  std::vector<StepResult> results(n);
  double speed_sum = 0.0;
  std::int64_t speed_samples = 0;

  const int workers = std::max(1, options.workers);
  // The thread limit defaults to the core count; lift it so the requested
  // worker count is honored on small machines too.
  std::optional<tbb::global_control> limit;
  std::optional<tbb::task_arena> arena;
  if (workers > 1) {
    limit.emplace(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(workers));
    arena.emplace(workers);
  }

  const auto last_tick = static_cast<std::int64_t>(std::floor(scenario.duration_max / dt + 1e-9));
  std::int64_t tick = 0;
  for (;; ++tick) {
    for (std::size_t i = 0; i < n; ++i) positions[i] = agents[i].kin.position;
    tracker.observe(tick, positions);

    bool all_arrived = true;
    for (auto& a : agents) {
      if (!a.goal_time && distance(a.kin.position, a.cfg.goal) <= scenario.goal_tolerance) {
        a.goal_time = static_cast<double>(tick) * dt;
      }
      all_arrived = all_arrived && a.goal_time.has_value();
    }

    firing.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = agents[i];
      if (tick >= a.phase && (tick - a.phase) % a.period == 0) firing.push_back(i);
    }

    auto step = [&](std::size_t idx) {
      const std::size_t i = firing[idx];
      AgentRuntime& a = agents[i];
      const auto meas = sense(scenario, i, positions, a.cfg, a.sense_rng);
      results[i].decision.reset();
      try {
        results[i].decision = decide(a.kin.position, a.adapt, meas, a.cfg);
      } catch (const CollisionStateError&) {
      } catch (const InfeasibleProximityError&) {
      }
    };
    if (!all_arrived && tick < last_tick) {
      if (arena && firing.size() > 1) {
        arena->execute([&] {
          tbb::parallel_for(std::size_t{0}, firing.size(), [&](std::size_t idx) { step(idx); });
        });
      } else {
        for (std::size_t idx = 0; idx < firing.size(); ++idx) step(idx);
      }
      for (std::size_t i : firing) {
        AgentRuntime& a = agents[i];
        if (results[i].decision) {
          a.cmd = results[i].decision->cmd;
          a.adapt = results[i].decision->state;
          a.clearance = results[i].decision->diag.clearance;
        } else {
          a.cmd = {};
          a.clearance = 0.0;
          ++report.decide_failures;
        }
        if (scenario.disturbance_bound > 0.0) {
          std::uniform_real_distribution<double> unit(0.0, 1.0);
          const double r = scenario.disturbance_bound * std::sqrt(unit(a.disturb_rng));
          const double th = 2.0 * std::numbers::pi * unit(a.disturb_rng);
          a.disturbance = {r * std::cos(th), r * std::sin(th)};
        }
      }
    }

    if (options.record_trace) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = agents[i];
        report.records.push_back({tick, static_cast<int>(i), a.kin.position, a.cmd, a.adapt.beta,
                                  a.clearance});
      }
    }

    if (all_arrived || tick >= last_tick) break;

    for (auto& a : agents) {
      const Point2 before = a.kin.position;
      a.kin = track(a.kin, a.cmd, dt, a.disturbance, a.cfg.a_max, a.cfg.d_u_track);
      const double speed = distance(before, a.kin.position) / dt;
      report.max_speed = std::max(report.max_speed, speed);
      if (!a.goal_time) {
        speed_sum += speed;
        ++speed_samples;
      }
    }
  }

  report.ticks = tick;
  report.violations = tracker.finish();
  report.min_pair_distance = tracker.min_pair_distance();
  report.avg_speed = speed_samples > 0 ? speed_sum / static_cast<double>(speed_samples) : 0.0;
  report.all_arrived = true;
  for (const auto& a : agents) {
    report.goal_times.push_back(a.goal_time);
    report.all_arrived = report.all_arrived && a.goal_time.has_value();
  }
  report.success = report.all_arrived && report.violations.empty();
  return report;
}

namespace {

std::vector<Violation> replay(const TraceReport& trace, const Scenario& scenario) {
  const std::size_t n = scenario.agents.size();
  ViolationTracker tracker(scenario);
  std::vector<Point2> positions(n);
  std::size_t k = 0;
  while (k < trace.records.size()) {
    const std::int64_t tick = trace.records[k].tick;
    std::vector<bool> seen(n, false);
    for (; k < trace.records.size() && trace.records[k].tick == tick; ++k) {
      const auto& r = trace.records[k];
      if (r.agent < 0 || static_cast<std::size_t>(r.agent) >= n) {
        throw std::invalid_argument("trace: agent id out of range at tick " + std::to_string(tick));
      }
      positions[static_cast<std::size_t>(r.agent)] = r.position;
      seen[static_cast<std::size_t>(r.agent)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
      throw std::invalid_argument("trace: incomplete agent set at tick " + std::to_string(tick));
    }
    tracker.observe(tick, positions);
  }
  return tracker.finish();
}

}  // namespace

std::vector<Violation> check_safety(const TraceReport& trace, const Scenario& scenario) {
  auto all = replay(trace, scenario);
  std::erase_if(all, [](const Violation& v) { return v.type == ViolationType::proximity; });
  return all;
}

std::vector<Violation> check_proximity(const TraceReport& trace, const Scenario& scenario) {
  auto all = replay(trace, scenario);
  std::erase_if(all, [](const Violation& v) { return v.type != ViolationType::proximity; });
  return all;
}

RunMetrics run_metrics(const TraceReport& trace, std::uint64_t seed) {
  RunMetrics m;
  m.seed = seed;
  m.success = trace.success;
  if (trace.all_arrived) {
    double t = 0.0;
    for (const auto& g : trace.goal_times) t = std::max(t, *g);
    m.time = t;
  }
  m.avg_speed = trace.avg_speed;
  m.max_speed = trace.max_speed;
  m.min_pair_distance = trace.min_pair_distance;
  for (const auto& v : trace.violations) {
    (v.type == ViolationType::proximity ? m.proximity_violations : m.safety_violations)++;
  }
  m.decide_failures = trace.decide_failures;
  return m;
}

BatchSummary metrics(const std::vector<RunMetrics>& runs) {
  BatchSummary s;
  s.runs = static_cast<int>(runs.size());
  if (runs.empty()) return s;
  double time_sum = 0.0;
  double speed_sum = 0.0;
  s.min_pair_distance = runs.front().min_pair_distance;
  for (const auto& r : runs) {
    speed_sum += r.avg_speed;
    s.max_speed = std::max(s.max_speed, r.max_speed);
    s.min_pair_distance = std::min(s.min_pair_distance, r.min_pair_distance);
    if (r.success) {
      ++s.successes;
      time_sum += *r.time;
    }
  }
  s.success_rate = static_cast<double>(s.successes) / s.runs;
  s.avg_speed = speed_sum / s.runs;
  if (s.successes > 0) s.avg_time = time_sum / s.successes;
  return s;
}

std::vector<RunMetrics> run_batch(const Scenario& scenario, const std::vector<std::uint64_t>& seeds,
                                  int jobs) {
  std::vector<RunMetrics> out(seeds.size());
  auto one = [&](std::size_t k) {
    RunOptions opt;
    opt.record_trace = false;
    opt.seed = seeds[k];
    out[k] = run_metrics(run(scenario, opt), seeds[k]);
  };
  if (jobs <= 1) {
    for (std::size_t k = 0; k < seeds.size(); ++k) one(k);
  } else {
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism,
                              static_cast<std::size_t>(jobs));
    tbb::task_arena arena(jobs);
    arena.execute([&] { tbb::parallel_for(std::size_t{0}, seeds.size(), one); });
  }
  return out;
}

std::vector<Obstacle> generate_forest(std::uint64_t seed, ForestRegion region, int count,
                                      double radius, double min_clearance,
                                      const std::vector<Point2>& keep_out) {
  if (count < 0) throw std::invalid_argument("generate_forest: negative count");
  if (!(radius > 0.0)) throw std::invalid_argument("generate_forest: radius must be > 0");
  if (!(region.max.x > region.min.x && region.max.y > region.min.y)) {
    throw std::invalid_argument("generate_forest: empty region");
  }
  std::mt19937_64 rng = make_stream(seed, 0xF0, 0);
  std::uniform_real_distribution<double> ux(region.min.x, region.max.x);
  std::uniform_real_distribution<double> uy(region.min.y, region.max.y);
  std::vector<Obstacle> out;
  out.reserve(static_cast<std::size_t>(count));
  const long max_attempts = 10000L * std::max(count, 1);
  for (long attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt >= max_attempts) {
      throw std::runtime_error("generate_forest: could not place " + std::to_string(count) +
                               " obstacles");
    }
    const Point2 c{ux(rng), uy(rng)};
    auto too_close = [&](Point2 q) { return distance(c, q) < min_clearance; };
    if (std::any_of(keep_out.begin(), keep_out.end(), too_close)) continue;
    if (std::any_of(out.begin(), out.end(), [&](const Obstacle& o) { return too_close(o.center); })) {
      continue;
    }
    out.push_back({c, radius});
  }
  return out;
}

std::vector<std::vector<bool>> grid_adjacency(int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid_adjacency: rows and cols must be >= 1");
  const int n = rows * cols;
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(n), std::vector<bool>(n, false));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (c + 1 < cols) adj[i][i + 1] = adj[i + 1][i] = true;
      if (r + 1 < rows) adj[i][i + cols] = adj[i + cols][i] = true;
    }
  }
  return adj;
}

Scenario grid_flock(const FlockParams& params) {
  Scenario s;
  s.adjacency = grid_adjacency(params.rows, params.cols);
  const int n = params.rows * params.cols;
  for (int r = 0; r < params.rows; ++r) {
    for (int c = 0; c < params.cols; ++c) {
      AgentSpec spec;
      spec.start = params.origin + Vec2{c * params.spacing, r * params.spacing};
      spec.config = params.agent;
      spec.config.goal = spec.start + params.travel;
      spec.config.proximity.clear();
      s.agents.push_back(spec);
    }
  }
  s.gamma.assign(static_cast<std::size_t>(n), std::vector<double>(n, params.gamma));
  for (int i = 0; i < n; ++i) s.gamma[i][i] = 0.0;
  return s;
}

}  // namespace rbl

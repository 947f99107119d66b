#include "rbl/cli/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace rbl::cli {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw TraceFormatError("trace line " + std::to_string(line) + ": bad " + column + " value '" +
                           s + "'");
  }
  return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const TraceReport& trace) {
  out << kTraceHeader << '\n';
  char buf[256];
  for (const auto& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%.6f,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<double>(r.tick) * trace.tick_dt, r.agent, r.position.x, r.position.y,
                  r.cmd.x, r.cmd.y, r.beta, r.clearance);
    out << buf;
  }
}

TraceReport read_trace_csv(std::istream& in, double tick_dt) {
  TraceReport trace;
  trace.tick_dt = tick_dt;
  std::string line;
  if (!std::getline(in, line)) throw TraceFormatError("trace: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) {
    throw TraceFormatError("trace: header must be '" + std::string(kTraceHeader) + "'");
  }
  std::size_t line_no = 1;
  std::int64_t last_tick = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 8) {
      throw TraceFormatError("trace line " + std::to_string(line_no) + ": expected 8 columns");
    }
    TraceRecord r;
    const double t = parse_double(cells[0], line_no, "t");
    r.tick = std::llround(t / tick_dt);
    const double agent = parse_double(cells[1], line_no, "agent_id");
    if (agent < 0 || agent != std::floor(agent)) {
      throw TraceFormatError("trace line " + std::to_string(line_no) + ": bad agent_id");
    }
    r.agent = static_cast<int>(agent);
    r.position = {parse_double(cells[2], line_no, "x"), parse_double(cells[3], line_no, "y")};
    r.cmd = {parse_double(cells[4], line_no, "vx"), parse_double(cells[5], line_no, "vy")};
    r.beta = parse_double(cells[6], line_no, "beta");
    r.clearance = parse_double(cells[7], line_no, "clearance");
    if (r.tick < last_tick) {
      throw TraceFormatError("trace line " + std::to_string(line_no) + ": time goes backwards");
    }
    last_tick = r.tick;
    trace.records.push_back(r);
  }
  trace.ticks = std::max<std::int64_t>(last_tick, 0);
  return trace;
}

std::string violations_json(const std::vector<Violation>& violations, double tick_dt) {
  json arr = json::array();
  for (const auto& v : violations) {
    arr.push_back({
        {"type", to_string(v.type)},
        {"a", v.a},
        {"b", v.b},
        {"tick_start", v.tick_start},
        {"tick_end", v.tick_end},
        {"t_start", static_cast<double>(v.tick_start) * tick_dt},
        {"t_end", static_cast<double>(v.tick_end) * tick_dt},
        {"worst_distance", v.worst_distance},
        {"limit", v.limit},
    });
  }
  return arr.dump(2) + "\n";
}

std::string metrics_json(const TraceReport& trace, const RunMetrics& m) {
  json goals = json::array();
  for (const auto& g : trace.goal_times) goals.push_back(optional_number(g));
  json doc{
      {"seed", m.seed},
      {"success", m.success},
      {"all_arrived", trace.all_arrived},
      {"time", optional_number(m.time)},
      {"goal_times", goals},
      {"avg_speed", m.avg_speed},
      {"max_speed", m.max_speed},
      {"min_pair_distance", m.min_pair_distance},
      {"safety_violations", m.safety_violations},
      {"proximity_violations", m.proximity_violations},
      {"decide_failures", m.decide_failures},
      {"ticks", trace.ticks},
      {"tick_dt", trace.tick_dt},
  };
  return doc.dump(2) + "\n";
}

std::string summary_json(const std::string& scenario_name, std::uint64_t first_seed,
                         std::uint64_t last_seed, const std::vector<RunMetrics>& runs,
                         const BatchSummary& s) {
  json per_run = json::array();
  for (const auto& r : runs) {
    per_run.push_back({
        {"seed", r.seed},
        {"success", r.success},
        {"time", optional_number(r.time)},
        {"avg_speed", r.avg_speed},
        {"max_speed", r.max_speed},
        {"min_pair_distance", r.min_pair_distance},
        {"safety_violations", r.safety_violations},
        {"proximity_violations", r.proximity_violations},
        {"decide_failures", r.decide_failures},
    });
  }
  json doc{
      {"scenario", scenario_name},
      {"seeds", json::array({first_seed, last_seed})},
      {"runs", s.runs},
      {"successes", s.successes},
      {"SR", s.success_rate},
      {"avg_time", optional_number(s.avg_time)},
      {"avg_speed", s.avg_speed},
      {"max_speed", s.max_speed},
      {"min_pair_distance", s.min_pair_distance},
      {"per_run", per_run},
  };
  return doc.dump(2) + "\n";
}

std::string trajectory_svg(const TraceReport& trace, const Scenario& scenario) {
  const std::size_t n = scenario.agents.size();
  std::vector<std::vector<Point2>> paths(n);
  for (const auto& r : trace.records) {
    if (r.agent < 0 || static_cast<std::size_t>(r.agent) >= n) continue;
    auto& p = paths[static_cast<std::size_t>(r.agent)];
    // Keep every tenth sample plus the final one.
    if (r.tick % 10 == 0 || r.tick == trace.ticks) p.push_back(r.position);
  }

  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  auto grow = [&](Point2 p, double pad) {
    x0 = std::min(x0, p.x - pad);
    y0 = std::min(y0, p.y - pad);
    x1 = std::max(x1, p.x + pad);
    y1 = std::max(y1, p.y + pad);
  };
  for (const auto& a : scenario.agents) {
    grow(a.start, 1.0);
    grow(a.config.goal, 1.0);
  }
  for (const auto& p : paths) {
    for (const auto& q : p) grow(q, 1.0);
  }
  for (const auto& o : scenario.obstacles) grow(o.center, o.radius + 0.5);

  const double scale = 20.0;  // pixels per meter
  const double w = (x1 - x0) * scale;
  const double h = (y1 - y0) * scale;
  // SVG y grows downward; flip so +y points up.
  auto px = [&](Point2 p) { return std::pair{(p.x - x0) * scale, (y1 - p.y) * scale}; };

  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                "viewBox=\"0 0 %.3f %.3f\">\n",
                w, h, w, h);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n" << buf;
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  out << "<g id=\"obstacles\" fill=\"black\">\n";
  for (const auto& o : scenario.obstacles) {
    const auto [cx, cy] = px(o.center);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.3f\" cy=\"%.3f\" r=\"%.3f\"/>\n", cx, cy,
                  std::max(o.radius * scale, 1.5));
    out << buf;
  }
  out << "</g>\n";

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  out << "<g id=\"trajectories\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "<polyline data-agent=\"" << i << "\" stroke=\"" << palette[i % 10] << "\" points=\"";
    for (std::size_t k = 0; k < paths[i].size(); ++k) {
      const auto [x, y] = px(paths[i][k]);
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", k ? " " : "", x, y);
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "</g>\n";

  // Proximity links drawn between final positions.
  out << "<g id=\"links\" stroke=\"red\" stroke-width=\"1\" opacity=\"0.7\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!scenario.adjacency[i][j] || paths[i].empty() || paths[j].empty()) continue;
      const auto [ax, ay] = px(paths[i].back());
      const auto [bx, by] = px(paths[j].back());
      std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\"/>\n",
                    ax, ay, bx, by);
      out << buf;
    }
  }
  out << "</g>\n";

  out << "<g id=\"goals\" fill=\"none\" stroke=\"green\">\n";
  for (const auto& a : scenario.agents) {
    const auto [gx, gy] = px(a.config.goal);
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", gx, gy,
                  scenario.goal_tolerance * scale);
    out << buf;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace rbl::cli

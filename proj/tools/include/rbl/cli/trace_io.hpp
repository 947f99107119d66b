#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbl/simulator.hpp"

namespace rbl::cli {

class TraceFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTraceHeader = "t,agent_id,x,y,vx,vy,beta,clearance";

/// One row per record, six decimals.
void write_trace_csv(std::ostream& out, const TraceReport& trace);

/// Reads rows back into records; ticks are recovered from t / tick_dt.
/// Throws TraceFormatError on a header or row that does not match the schema.
TraceReport read_trace_csv(std::istream& in, double tick_dt);

std::string violations_json(const std::vector<Violation>& violations, double tick_dt);
std::string metrics_json(const TraceReport& trace, const RunMetrics& metrics);
std::string summary_json(const std::string& scenario_name, std::uint64_t first_seed,
                         std::uint64_t last_seed, const std::vector<RunMetrics>& runs,
                         const BatchSummary& summary);

/// Trajectories, obstacles and proximity links as a standalone SVG document.
std::string trajectory_svg(const TraceReport& trace, const Scenario& scenario);

}  // namespace rbl::cli

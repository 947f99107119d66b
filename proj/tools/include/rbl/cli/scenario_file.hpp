#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "rbl/simulator.hpp"

namespace rbl::cli {

inline constexpr int kScenarioFormatVersion = 1;

/// Bad scenario document. `what()` names the offending field path or line.
class ScenarioParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

/// Serializes every field explicitly (no "defaults" block). Round-trips through
/// parse_scenario.
std::string dump_scenario(const Scenario& scenario);

}  // namespace rbl::cli

#pragma once

#include "ptime/scenario.hpp"
#include "ptime/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <istream>
#include <string>

namespace ptime::app {

struct RunOutput {
  std::string name;
  Trajectory<double> trajectory;
  std::string csv;
  nlohmann::json report;
  bool pass{true};
};

/// Runs a system or differentiator scenario; checks are recorded in the report.
RunOutput run_scenario(const Scenario& s);

/// Formats a value with 17 significant digits.
std::string format_number(double v);

/// Writes <name>.csv, <name>.report.json and <name>.scenario.json into `dir`,
/// each through a temporary file and a rename.
void write_outputs(const RunOutput& out, const Scenario& s, const std::filesystem::path& dir);

/// Writes `content` to `path` atomically (temporary sibling + rename).
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Streams a `t,y` CSV through the scenario's differentiator and returns
/// `t,z0..z{n_d},w1..w{n_f},kappa`. The differentiator starts at the first sample time.
std::string differentiate_csv(const Scenario& s, std::istream& in);

}  // namespace ptime::app

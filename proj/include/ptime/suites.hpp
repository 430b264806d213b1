#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace ptime::app {

/// Names accepted by run_verify, in execution order; "all" runs every one.
const std::vector<std::string>& suite_names();

struct VerifyOutput {
  nlohmann::json report;
  bool pass{true};
};

/// Runs one verification suite (or "all", fanned out across workers and
/// reported in fixed order). Throws std::invalid_argument for an unknown name.
VerifyOutput run_verify(const std::string& suite);

}  // namespace ptime::app

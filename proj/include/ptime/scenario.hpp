#pragma once

#include "ptime/redesign.hpp"
#include "ptime/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptime::app {

/// Schema violation; the message names the offending field path.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProfileSpec {
  std::string kind = "exponential";  // exponential | rational | tabulated
  double alpha = 1.0;
  double T_c = 1.0;
  double T_f = std::numeric_limits<double>::infinity();
  std::vector<double> tau;
  std::vector<double> phi;
};

struct FieldSpec {
  std::string kind = "linear";  // linear | hosm | canonical
  std::vector<double> gains;
  double r = 1.0;
  double alpha = 1.0;
  std::vector<PowerSum<double>> g;
  std::optional<double> late_tau;
  std::vector<PowerSum<double>> late_g;
};

struct DriftSpec {
  std::vector<double> gains;
  double m = 1.0;
};

struct DisturbanceSpec {
  std::string kind = "zero";  // zero | harmonic | signal_derivative
  HarmonicSignal<double> signal;
  int order = 0;
};

struct Scenario {
  std::string name = "scenario";
  std::string mode = "system";  // system | differentiator
  ProfileSpec profile;
  FieldSpec field;
  DriftSpec drift;
  double L = 0.0;
  double t0 = 0.0;
  std::vector<double> x0;
  double horizon = 10.0;
  StepPolicy<double> step;
  double kappa_max = 1e9;
  DisturbanceSpec disturbance;
  // Differentiator mode.
  HarmonicSignal<double> signal;
  std::optional<HarmonicSignal<double>> noise;
  int n_d = 0;
  std::optional<double> sample_dt;  // zero-order-hold interval; unset reads y(t) at every substep
  // Checks.
  double epsilon = 1e-2;
  double dwell = 0.5;
  std::optional<double> T_max_star;

  int order() const { return static_cast<int>(field.gains.size()); }
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);

/// Built-in reproductions of the three differentiator examples.
Scenario builtin_example(int id, bool noise);

BlowUpProfile<double> build_profile(const Scenario& s);
SystemPair<double> build_system(const Scenario& s);
DisturbanceSignal<double> build_disturbance(const Scenario& s);

}  // namespace ptime::app

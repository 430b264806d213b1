// Scenario runner: built-in examples, scenario files, verification suites and
// batch differentiation. Exit codes: 0 pass, 1 check failure, 2 usage or parse error.

#include "ptime/runner.hpp"
#include "ptime/scenario.hpp"
#include "ptime/suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kUsage = 2;

int run(int argc, char** argv) {
  CLI::App app{"Prescribed-time redesign runner"};
  app.set_help_flag("--help", "Print this help message and exit");
  std::optional<int> example;
  bool noise = false;
  std::optional<std::string> scenario_path;
  std::string out_dir = "out";
  std::optional<double> h;
  std::optional<int> stride;
  std::optional<std::string> suite;
  std::optional<std::string> diff_input;
  bool export_only = false;

  auto* ex = app.add_option("--example", example, "Built-in example (1, 2 or 3)")->check(CLI::Range(1, 3));
  app.add_flag("--noise", noise, "Add measurement noise 0.01cos(10t)+0.001cos(30t) to an example");
  auto* sc = app.add_option("--scenario", scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--h", h, "Base integration step")->check(CLI::PositiveNumber);
  app.add_option("--stride", stride, "Keep every k-th base step")->check(CLI::Range(1, 1 << 30));
  auto* ver = app.add_option("--verify", suite, "Verification suite")
                  ->check(CLI::IsMember(ptime::app::suite_names()));
  auto* dif = app.add_option("--differentiate", diff_input, "Differentiate a t,y CSV with the scenario's differentiator")
                  ->check(CLI::ExistingFile);
  app.add_flag("--export-scenario", export_only, "Write the scenario JSON without running it");
  ex->excludes(sc)->excludes(ver);
  sc->excludes(ver);
  dif->excludes(ver);
  app.add_flag_callback("--list-suites", [] {
    for (const auto& s : ptime::app::suite_names()) std::cout << s << "\n";
    std::exit(kPass);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kPass : kUsage;
  }
  if (noise && !example) {
    std::cerr << "--noise applies to --example only\n";
    return kUsage;
  }

  if (suite) {
    const auto result = ptime::app::run_verify(*suite);
    std::filesystem::create_directories(out_dir);
    ptime::app::write_atomic(std::filesystem::path(out_dir) / ("verify_" + *suite + ".json"), result.report.dump(2) + "\n");
    for (const auto& s : result.report["suites"]) {
      std::cout << (s["pass"].get<bool>() ? "PASS " : "FAIL ") << s["suite"].get<std::string>() << "\n";
      if (s.contains("error")) std::cout << "  error: " << s["error"].get<std::string>() << "\n";
      if (s.contains("checks"))
        for (const auto& c : s["checks"])
          std::cout << "  [" << c["status"].get<std::string>() << "] " << c["name"].get<std::string>() << "\n";
    }
    return result.pass ? kPass : kCheckFailure;
  }

  if (!example && !scenario_path) {
    std::cerr << "one of --example, --scenario or --verify is required\n" << app.help();
    return kUsage;
  }

  ptime::app::Scenario scenario;
  try {
    scenario = example ? ptime::app::builtin_example(*example, noise) : ptime::app::load_scenario(*scenario_path);
  } catch (const ptime::app::ParseError& e) {
    std::cerr << "scenario error: " << e.what() << "\n";
    return kUsage;
  }
  if (h) scenario.step.h = *h;
  if (stride) scenario.step.stride = *stride;

  if (diff_input) {
    std::ifstream in(*diff_input);
    const std::string csv = ptime::app::differentiate_csv(scenario, in);
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / (scenario.name + ".differentiated.csv");
    ptime::app::write_atomic(path, csv);
    std::cout << "wrote " << path.string() << "\n";
    return kPass;
  }

  if (export_only) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / (scenario.name + ".scenario.json");
    ptime::app::write_atomic(path, ptime::app::to_json(scenario).dump(2) + "\n");
    std::cout << "wrote " << path.string() << "\n";
    return kPass;
  }

  const auto result = ptime::app::run_scenario(scenario);
  ptime::app::write_outputs(result, scenario, out_dir);
  std::cout << result.report.dump(2) << "\n";
  return result.pass ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ptime::app::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ptime::ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kCheckFailure;
  }
}

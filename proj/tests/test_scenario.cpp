#include <doctest.h>

#include "ptime/runner.hpp"
#include "ptime/scenario.hpp"

#include <cmath>
#include <sstream>

using namespace ptime;
using namespace ptime::app;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({
    "name": "minimal",
    "profile": {"kind": "exponential", "alpha": 1, "T_c": 1},
    "field": {"kind": "linear", "gains": [-2, -1], "r": 3},
    "drift": {"gains": [-2, -1], "m": 0},
    "L": 1,
    "x0": [0, 0],
    "horizon": 1,
    "step": {"method": "rk4", "h": 1e-3},
    "stride": 10
  })");
}

}  // namespace

TEST_CASE("minimal scenario gives an all-zero trajectory") {
  const auto s = parse_scenario(minimal());
  const auto out = run_scenario(s);
  for (const auto& x : out.trajectory.states) CHECK(x.isZero(0));
  CHECK(out.pass);
  CHECK(out.csv.rfind("t,x1,x2,kappa\n", 0) == 0);
  CHECK(out.report["settling"]["settle_time"] == 0.0);
}

TEST_CASE("unknown keys and bad values are rejected with a field path") {
  auto doc = minimal();
  doc["bogus"] = 1;
  CHECK_THROWS_WITH_AS(parse_scenario(doc), "scenario.bogus: unknown key", ParseError);

  doc = minimal();
  doc["profile"]["speed"] = 2;
  CHECK_THROWS_WITH_AS(parse_scenario(doc), "profile.speed: unknown key", ParseError);

  doc = minimal();
  doc["profile"]["T_c"] = -1;
  CHECK_THROWS_WITH_AS(parse_scenario(doc), "profile.T_c: must be positive", ParseError);

  doc = minimal();
  doc["x0"] = json::array({1.0});
  CHECK_THROWS_AS(parse_scenario(doc), ParseError);

  doc = minimal();
  doc["field"]["gains"] = json::array({2.0, -1.0});
  CHECK_THROWS_AS(parse_scenario(doc), ParseError);  // not Hurwitz

  doc = minimal();
  doc["step"]["method"] = "midpoint";
  CHECK_THROWS_AS(parse_scenario(doc), ParseError);

  doc = minimal();
  doc["n_d"] = 1;
  CHECK_THROWS_AS(parse_scenario(doc), ParseError);
}

TEST_CASE("T_f accepts inf") {
  auto doc = minimal();
  doc["profile"]["T_f"] = "inf";
  CHECK(std::isinf(parse_scenario(doc).profile.T_f));
  doc["profile"]["T_f"] = 2.0;
  CHECK(parse_scenario(doc).profile.T_f == 2.0);
}

TEST_CASE("disturbance above L is a contract violation") {
  auto doc = minimal();
  doc["x0"] = json::array({1.0, 0.0});
  doc["disturbance"] = json::parse(R"({"kind": "harmonic", "terms": [{"amplitude": 2.5, "frequency": 1.3}]})");
  CHECK_THROWS_AS(run_scenario(parse_scenario(doc)), BoundViolation);
  doc["L"] = 2.5;
  CHECK_NOTHROW(run_scenario(parse_scenario(doc)));
}

TEST_CASE("built-in examples round-trip through JSON") {
  for (int id : {1, 2, 3})
    for (bool noise : {false, true}) {
      const auto s = builtin_example(id, noise);
      const json doc = to_json(s);
      const auto back = parse_scenario(json::parse(doc.dump()));
      CHECK(to_json(back) == doc);
    }
  CHECK_THROWS(builtin_example(4, false));
}

TEST_CASE("scenario file reproduces the built-in run byte for byte") {
  auto s = builtin_example(3, false);
  s.horizon = 0.2;
  s.dwell = 0.1;
  s.step.h = 1e-4;
  const auto direct = run_scenario(s);
  const auto again = run_scenario(parse_scenario(json::parse(to_json(s).dump())));
  CHECK(direct.csv == again.csv);
  CHECK(direct.report.dump() == again.report.dump());
  CHECK(direct.csv.rfind("t,x1,x2,kappa,y,dy_true\n", 0) == 0);
}

TEST_CASE("noisy runs do not assert settling") {
  auto s = builtin_example(3, true);
  s.horizon = 0.2;
  s.dwell = 0.1;
  s.step.h = 1e-4;
  const auto out = run_scenario(s);
  CHECK(out.report["settling"] == "noisy: no settling asserted");
}

TEST_CASE("batch differentiation") {
  auto s = builtin_example(3, false);
  std::ostringstream csv;
  csv << "t,y\n";
  for (int k = 0; k <= 3000; ++k) {
    const double t = 1.0 + k * 1e-3;
    csv << t << "," << 0.5 * t * t << "\n";
  }
  std::istringstream in(csv.str());
  const std::string out = differentiate_csv(s, in);
  CHECK(out.rfind("t,z0,z1,kappa\n", 0) == 0);
  // Last row: z1 tracks t = 4 after the transient.
  const auto last_start = out.rfind('\n', out.size() - 2) + 1;
  std::istringstream row(out.substr(last_start));
  std::string t, z0, z1;
  std::getline(row, t, ',');
  std::getline(row, z0, ',');
  std::getline(row, z1, ',');
  CHECK(std::stod(t) == doctest::Approx(4.0));
  CHECK(std::stod(z1) == doctest::Approx(4.0).epsilon(1e-2));

  std::istringstream bad("time,value\n1,2\n");
  CHECK_THROWS_AS(differentiate_csv(s, bad), ParseError);
  std::istringstream backwards("t,y\n1,2\n0.5,2\n");
  CHECK_THROWS_AS(differentiate_csv(s, backwards), ParseError);
}

#include "ptime/runner.hpp"

#include "ptime/differentiator.hpp"
#include "ptime/simulate.hpp"
#include "ptime/verify.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ptime::app {

using nlohmann::json;

namespace {

std::string derivative_column(int j) {
  if (j == 0) return "y";
  if (j == 1) return "dy_true";
  return "d" + std::to_string(j) + "y_true";
}

json settle_json(const SettlingReport<double>& r) {
  json out = {{"settled", r.settled}, {"epsilon", r.epsilon}, {"dwell", r.dwell}, {"max_excursion", r.max_excursion}};
  out["settle_time"] = r.settled ? json(r.settle_time) : json("not settled");
  return out;
}

json check(const std::string& name, bool pass, json evidence) {
  evidence["name"] = name;
  evidence["status"] = pass ? "pass" : "fail";
  return evidence;
}

struct DiffRun {
  Trajectory<double> traj;
  std::vector<std::vector<double>> extra;
};

DiffRun run_differentiator(const Scenario& s, const SystemPair<double>& sp) {
  FilteringDifferentiator<double> diff(sp, s.n_d, s.step);
  const int n_f = diff.n_f();
  const auto delta = build_disturbance(s);

  std::vector<double> derivs(static_cast<std::size_t>(s.n_d) + 1);
  auto truth = [&](double t) {
    for (int j = 0; j <= s.n_d; ++j) derivs[static_cast<std::size_t>(j)] = s.signal.derivative(t, j);
  };
  truth(sp.t0);
  Vec<double> w(n_f), z(s.n_d + 1);
  for (int i = 0; i < n_f; ++i) w(i) = s.x0[static_cast<std::size_t>(i)];
  for (int j = 0; j <= s.n_d; ++j) z(j) = s.x0[static_cast<std::size_t>(n_f + j)] + derivs[static_cast<std::size_t>(j)];
  diff.reset(w, z);

  DiffRun out;
  auto record = [&](double t) {
    truth(t);
    out.traj.times.push_back(t);
    out.traj.states.push_back(diff.error_state(derivs));
    out.traj.gains.push_back(diff.output().kappa);
    out.extra.push_back(derivs);
  };
  record(sp.t0);

  auto measure = [&s](double t) { return s.signal(t) + (s.noise ? (*s.noise)(t) : 0.0); };
  // Without sample_dt the signal is read at every substep; dt is then only the recording grid.
  const double dt = s.sample_dt.value_or(s.step.h);
  const long long samples = std::llround(s.horizon / dt);
  for (long long k = 0; k < samples; ++k) {
    const double t = sp.t0 + double(k) * dt;
    sample_disturbance(delta, t);
    if (s.sample_dt) {
      diff.step(measure(t), dt);
    } else {
      diff.step(measure, dt);
    }
    if ((k + 1) % s.step.stride == 0 || k + 1 == samples) record(sp.t0 + double(k + 1) * dt);
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunOutput run_scenario(const Scenario& s) {
  const SystemPair<double> sp = build_system(s);
  const int n = sp.order();
  RunOutput out;
  out.name = s.name;

  std::vector<std::vector<double>> extra;
  if (s.mode == "system") {
    const auto dist = build_disturbance(s);
    Vec<double> x0(n);
    for (int i = 0; i < n; ++i) x0(i) = s.x0[static_cast<std::size_t>(i)];
    out.trajectory = simulate(sp, x0, s.horizon, s.step, [&](double t) { return sample_disturbance(dist, t); });
  } else {
    auto run = run_differentiator(s, sp);
    out.trajectory = std::move(run.traj);
    extra = std::move(run.extra);
  }
  const auto& traj = out.trajectory;

  std::string csv = "t";
  for (int i = 1; i <= n; ++i) csv += ",x" + std::to_string(i);
  csv += ",kappa";
  if (!extra.empty())
    for (int j = 0; j <= s.n_d; ++j) csv += "," + derivative_column(j);
  csv += "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    csv += format_number(traj.times[k]);
    for (int i = 0; i < n; ++i) csv += "," + format_number(traj.states[k](i));
    csv += "," + format_number(traj.gains[k]);
    if (!extra.empty())
      for (double v : extra[k]) csv += "," + format_number(v);
    csv += "\n";
  }
  out.csv = std::move(csv);

  const double bound = sp.profile.switch_time();
  const double tol = 2 * s.step.h;
  json report = {{"name", s.name},
                 {"mode", s.mode},
                 {"order", n},
                 {"profile", sp.profile.kind_name()},
                 {"T_c", sp.profile.T_c()},
                 {"eta", sp.profile.eta()},
                 {"settling_bound", bound},
                 {"t0", s.t0},
                 {"h", s.step.h},
                 {"samples", traj.size()}};
  if (s.mode == "differentiator") report["n_d"] = s.n_d;

  double max_gain = 0, post_transient = 0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    max_gain = std::max(max_gain, traj.gains[k]);
    if (traj.times[k] - s.t0 >= bound) post_transient = std::max(post_transient, traj.states[k].lpNorm<Eigen::Infinity>());
  }
  report["max_kappa"] = max_gain;
  report["max_abs_state_after_bound"] = post_transient;

  json checks = json::array();
  if (s.noise) {
    report["settling"] = "noisy: no settling asserted";
    bool finite = true;
    for (const auto& x : traj.states) finite = finite && x.allFinite();
    checks.push_back(check("bounded_estimates", finite, {{"max_abs_state_after_bound", post_transient}}));
  } else if (s.dwell <= traj.times.back() - traj.times.front()) {
    const auto settle = estimate_settling_time(traj, s.epsilon, s.dwell);
    report["settling"] = settle_json(settle);
    const bool ok = settle.settled && settle.settle_time - s.t0 <= bound + tol;
    checks.push_back(check("settles_within_bound", ok,
                           {{"settle_time", settle.settled ? json(settle.settle_time - s.t0) : json("not settled")},
                            {"limit", bound + tol}}));
  }
  if (s.T_max_star) {
    const auto g = check_gain_bound(traj, sp.profile, *s.T_max_star);
    json evidence = {{"max_kappa", g.max_gain}, {"log_bound", g.log_bound}, {"T_max_star", *s.T_max_star}};
    if (!g.note.empty()) evidence["note"] = g.note;
    evidence["name"] = "gain_bound";
    evidence["status"] = to_string(g.status);
    checks.push_back(evidence);
  }
  report["checks"] = checks;
  for (const auto& c : checks) out.pass = out.pass && c["status"] != "fail";
  report["pass"] = out.pass;
  out.report = std::move(report);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
    if (!f) throw std::runtime_error("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_outputs(const RunOutput& out, const Scenario& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_atomic(dir / (out.name + ".csv"), out.csv);
  write_atomic(dir / (out.name + ".report.json"), out.report.dump(2) + "\n");
  write_atomic(dir / (out.name + ".scenario.json"), to_json(s).dump(2) + "\n");
}

std::string differentiate_csv(const Scenario& s, std::istream& in) {
  if (s.mode != "differentiator") throw ParseError("batch differentiation needs a differentiator scenario");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("input CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,y") throw ParseError("input CSV header must be 't,y', got '" + line + "'");

  std::vector<double> ts, ys;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, rest;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || std::getline(fields, rest, ','))
      throw ParseError("input CSV row " + std::to_string(row) + ": expected two columns");
    try {
      std::size_t ea = 0, eb = 0;
      const double t = std::stod(a, &ea), y = std::stod(b, &eb);
      if (ea != a.size() || eb != b.size()) throw std::invalid_argument("trailing characters");
      if (!std::isfinite(t) || !std::isfinite(y)) throw std::invalid_argument("non-finite value");
      if (!ts.empty() && !(t > ts.back())) throw ParseError("input CSV row " + std::to_string(row) + ": times must increase");
      ts.push_back(t);
      ys.push_back(y);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("input CSV row " + std::to_string(row) + ": not numeric");
    }
  }
  if (ts.empty()) throw ParseError("input CSV has no samples");

  Scenario local = s;
  local.t0 = ts.front();
  FilteringDifferentiator<double> diff(build_system(local), s.n_d, s.step);

  std::string out = "t";
  for (int j = 0; j <= s.n_d; ++j) out += ",z" + std::to_string(j);
  for (int i = 1; i <= diff.n_f(); ++i) out += ",w" + std::to_string(i);
  out += ",kappa\n";
  auto emit = [&](double t) {
    const auto o = diff.output();
    out += format_number(t);
    for (Eigen::Index j = 0; j < o.z.size(); ++j) out += "," + format_number(o.z(j));
    for (Eigen::Index i = 0; i < o.w.size(); ++i) out += "," + format_number(o.w(i));
    out += "," + format_number(o.kappa) + "\n";
  };
  emit(ts.front());
  for (std::size_t k = 1; k < ts.size(); ++k) {
    diff.step(ys[k - 1], ts[k] - ts[k - 1]);
    emit(ts[k]);
  }
  return out;
}

}  // namespace ptime::app

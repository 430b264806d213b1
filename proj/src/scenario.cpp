#include "ptime/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <set>

namespace ptime::app {

using nlohmann::json;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!keys.count(key)) throw ParseError(path + "." + key + ": unknown key");
}

double number(const json& obj, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError(path + "." + key + ": required");
  }
  const json& v = obj.at(key);
  if (v.is_string() && (v == "inf" || v == "+inf")) return kInf;
  if (!v.is_number()) throw ParseError(path + "." + key + ": expected a number");
  return v.get<double>();
}

double positive(const json& obj, const std::string& path, const char* key, std::optional<double> fallback = {}) {
  const double v = number(obj, path, key, fallback);
  if (!(v > 0)) throw ParseError(path + "." + key + ": must be positive");
  return v;
}

std::vector<double> numbers(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ParseError(path + "." + key + ": required");
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw ParseError(path + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ParseError(path + "." + key + "[" + std::to_string(i) + "]: expected a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

std::string text(const json& obj, const std::string& path, const char* key, std::initializer_list<const char*> options,
                 std::optional<std::string> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError(path + "." + key + ": required");
  }
  if (!obj.at(key).is_string()) throw ParseError(path + "." + key + ": expected a string");
  const auto value = obj.at(key).get<std::string>();
  for (const char* o : options)
    if (value == o) return value;
  std::string list;
  for (const char* o : options) list += std::string(list.empty() ? "" : "|") + o;
  throw ParseError(path + "." + key + ": expected one of " + list + ", got '" + value + "'");
}

PowerSum<double> parse_power_sum(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ParseError(path + ": expected an array of terms");
  PowerSum<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    reject_unknown(arr[i], p, {"coefficient", "exponent"});
    const double c = number(arr[i], p, "coefficient");
    const double e = number(arr[i], p, "exponent");
    if (!(e >= 0) || !std::isfinite(e)) throw ParseError(p + ".exponent: must be finite and >= 0");
    out.terms.push_back({c, e});
  }
  return out;
}

std::vector<PowerSum<double>> parse_family(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ParseError(path + "." + key + ": required");
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw ParseError(path + "." + key + ": expected an array");
  std::vector<PowerSum<double>> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(parse_power_sum(arr[i], path + "." + key + "[" + std::to_string(i) + "]"));
  return out;
}

HarmonicSignal<double> parse_harmonic(const json& obj, const std::string& path) {
  reject_unknown(obj, path, {"terms"});
  if (!obj.contains("terms") || !obj.at("terms").is_array()) throw ParseError(path + ".terms: required array");
  HarmonicSignal<double> out;
  const json& arr = obj.at("terms");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + ".terms[" + std::to_string(i) + "]";
    reject_unknown(arr[i], p, {"amplitude", "frequency", "phase"});
    out.terms.push_back({number(arr[i], p, "amplitude"), number(arr[i], p, "frequency", 0.0),
                         number(arr[i], p, "phase", 0.0)});
  }
  return out;
}

json harmonic_json(const HarmonicSignal<double>& s) {
  json terms = json::array();
  for (const auto& t : s.terms) terms.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
  return {{"terms", terms}};
}

json family_json(const std::vector<PowerSum<double>>& family) {
  json out = json::array();
  for (const auto& g : family) {
    json terms = json::array();
    for (const auto& t : g.terms) terms.push_back({{"coefficient", t.coefficient}, {"exponent", t.exponent}});
    out.push_back(terms);
  }
  return out;
}

json extended(double v) { return std::isinf(v) ? json("inf") : json(v); }

HarmonicSignal<double> example_signal() {
  // y = -0.4 sin t + 0.8 cos 0.8 t
  return {{{-0.4, 1.0, -std::numbers::pi / 2}, {0.8, 0.8, 0.0}}};
}

HarmonicSignal<double> example_noise() { return {{{0.01, 10.0, 0.0}, {0.001, 30.0, 0.0}}}; }

PowerSum<double> power(double c, double e) { return {{{c, e}}}; }

}  // namespace

Scenario parse_scenario(const json& doc) {
  reject_unknown(doc, "scenario",
                 {"name", "mode", "profile", "kappa_max", "field", "drift", "L", "t0", "x0", "horizon", "step", "stride",
                  "disturbance", "signal", "noise", "n_d", "sample_dt", "settle", "T_max_star"});
  Scenario s;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw ParseError("scenario.name: expected a string");
    s.name = doc.at("name").get<std::string>();
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
      throw ParseError("scenario.name: must be a non-empty file stem");
  }
  s.mode = text(doc, "scenario", "mode", {"system", "differentiator"}, std::string("system"));

  if (!doc.contains("profile")) throw ParseError("scenario.profile: required");
  const json& p = doc.at("profile");
  reject_unknown(p, "profile", {"kind", "alpha", "T_c", "T_f", "tau", "phi"});
  s.profile.kind = text(p, "profile", "kind", {"exponential", "rational", "tabulated"});
  s.profile.T_c = positive(p, "profile", "T_c");
  s.profile.T_f = positive(p, "profile", "T_f", kInf);
  if (s.profile.kind == "exponential") s.profile.alpha = positive(p, "profile", "alpha", 1.0);
  else if (p.contains("alpha")) throw ParseError("profile.alpha: only valid for kind 'exponential'");
  if (s.profile.kind == "tabulated") {
    s.profile.tau = numbers(p, "profile", "tau");
    s.profile.phi = numbers(p, "profile", "phi");
  } else if (p.contains("tau") || p.contains("phi")) {
    throw ParseError("profile.tau/phi: only valid for kind 'tabulated'");
  }
  s.kappa_max = number(doc, "scenario", "kappa_max", 1e9);
  if (!(s.kappa_max >= 1)) throw ParseError("scenario.kappa_max: must be >= 1");

  if (!doc.contains("field")) throw ParseError("scenario.field: required");
  const json& f = doc.at("field");
  reject_unknown(f, "field", {"kind", "gains", "r", "alpha", "g", "late"});
  s.field.kind = text(f, "field", "kind", {"linear", "hosm", "canonical"});
  s.field.gains = numbers(f, "field", "gains");
  s.field.r = number(f, "field", "r", 1.0);
  if (!(s.field.r >= 0) || !std::isfinite(s.field.r)) throw ParseError("field.r: must be finite and >= 0");
  if (s.field.kind == "canonical") {
    s.field.alpha = positive(f, "field", "alpha", 1.0);
    s.field.g = parse_family(f, "field", "g");
    if (f.contains("late")) {
      const json& late = f.at("late");
      reject_unknown(late, "field.late", {"tau_switch", "g"});
      s.field.late_tau = number(late, "field.late", "tau_switch");
      if (!(*s.field.late_tau >= 0)) throw ParseError("field.late.tau_switch: must be >= 0");
      s.field.late_g = parse_family(late, "field.late", "g");
    }
  } else if (f.contains("alpha") || f.contains("g") || f.contains("late")) {
    throw ParseError("field.alpha/g/late: only valid for kind 'canonical'");
  }

  if (!doc.contains("drift")) throw ParseError("scenario.drift: required");
  const json& d = doc.at("drift");
  reject_unknown(d, "drift", {"gains", "m"});
  s.drift.gains = numbers(d, "drift", "gains");
  s.drift.m = number(d, "drift", "m", 1.0);

  s.L = number(doc, "scenario", "L", 0.0);
  if (!(s.L >= 0) || !std::isfinite(s.L)) throw ParseError("scenario.L: must be finite and >= 0");
  s.t0 = number(doc, "scenario", "t0", 0.0);
  if (!std::isfinite(s.t0)) throw ParseError("scenario.t0: must be finite");
  s.x0 = numbers(doc, "scenario", "x0");
  s.horizon = positive(doc, "scenario", "horizon", 10.0);
  if (!std::isfinite(s.horizon)) throw ParseError("scenario.horizon: must be finite");

  if (doc.contains("step")) {
    const json& st = doc.at("step");
    reject_unknown(st, "step", {"method", "h", "kappa_ref", "kappa_power", "divergence_bound"});
    s.step.method = text(st, "step", "method", {"euler", "rk4"}, std::string("euler")) == "rk4" ? Method::RK4 : Method::Euler;
    s.step.h = positive(st, "step", "h", 1e-5);
    s.step.kappa_ref = positive(st, "step", "kappa_ref", 10.0);
    s.step.kappa_power = number(st, "step", "kappa_power", 1.0);
    if (!(s.step.kappa_power >= 0)) throw ParseError("step.kappa_power: must be >= 0");
    s.step.divergence_bound = positive(st, "step", "divergence_bound", 1e12);
  }
  if (doc.contains("stride")) {
    if (!doc.at("stride").is_number_integer() || doc.at("stride").get<long long>() < 1)
      throw ParseError("scenario.stride: expected an integer >= 1");
    s.step.stride = static_cast<int>(doc.at("stride").get<long long>());
  }

  if (doc.contains("disturbance")) {
    const json& dist = doc.at("disturbance");
    reject_unknown(dist, "disturbance", {"kind", "terms", "order"});
    s.disturbance.kind = text(dist, "disturbance", "kind", {"zero", "harmonic", "signal_derivative"});
    if (s.disturbance.kind != "zero") {
      json terms = {{"terms", dist.contains("terms") ? dist.at("terms") : json()}};
      s.disturbance.signal = parse_harmonic(terms, "disturbance");
    }
    if (s.disturbance.kind == "signal_derivative") {
      if (!dist.contains("order") || !dist.at("order").is_number_integer() || dist.at("order").get<int>() < 0)
        throw ParseError("disturbance.order: expected an integer >= 0");
      s.disturbance.order = dist.at("order").get<int>();
    }
  }

  if (doc.contains("signal")) s.signal = parse_harmonic(doc.at("signal"), "signal");
  if (doc.contains("noise")) s.noise = parse_harmonic(doc.at("noise"), "noise");
  if (doc.contains("n_d")) {
    if (!doc.at("n_d").is_number_integer() || doc.at("n_d").get<int>() < 0)
      throw ParseError("scenario.n_d: expected an integer >= 0");
    s.n_d = doc.at("n_d").get<int>();
  }
  if (doc.contains("sample_dt")) s.sample_dt = positive(doc, "scenario", "sample_dt");

  if (doc.contains("settle")) {
    const json& st = doc.at("settle");
    reject_unknown(st, "settle", {"epsilon", "dwell"});
    s.epsilon = positive(st, "settle", "epsilon", 1e-2);
    s.dwell = number(st, "settle", "dwell", 0.5);
    if (!(s.dwell >= 0)) throw ParseError("settle.dwell: must be >= 0");
  }
  if (doc.contains("T_max_star")) s.T_max_star = positive(doc, "scenario", "T_max_star");

  // Cross-field checks.
  const int n = s.order();
  if (n < 1 || n > kMaxOrder) throw ParseError("field.gains: order must be in [1, " + std::to_string(kMaxOrder) + "]");
  if (static_cast<int>(s.drift.gains.size()) != n) throw ParseError("drift.gains: must match the field order");
  if (static_cast<int>(s.x0.size()) != n) throw ParseError("scenario.x0: must match the field order");
  if (s.field.kind == "canonical") {
    if (static_cast<int>(s.field.g.size()) != n) throw ParseError("field.g: need one g_i per gain");
    if (s.field.late_tau && static_cast<int>(s.field.late_g.size()) != n)
      throw ParseError("field.late.g: need one g_i per gain");
  }
  if (s.mode == "differentiator") {
    if (s.n_d + 1 > n) throw ParseError("scenario.n_d: must satisfy n_d + 1 <= order");
    if (doc.contains("disturbance")) throw ParseError("scenario.disturbance: implied by the signal in differentiator mode");
  } else if (doc.contains("signal") || doc.contains("noise") || doc.contains("n_d") || doc.contains("sample_dt")) {
    throw ParseError("scenario.signal/noise/n_d/sample_dt: only valid in differentiator mode");
  }
  if (s.dwell > s.horizon) throw ParseError("settle.dwell: exceeds the horizon");

  // Surface construction-time contract failures (Hurwitz gates, tabulated mass) as parse errors.
  try {
    build_system(s);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_scenario(doc);
}

json to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["mode"] = s.mode;
  json p = {{"kind", s.profile.kind}, {"T_c", s.profile.T_c}, {"T_f", extended(s.profile.T_f)}};
  if (s.profile.kind == "exponential") p["alpha"] = s.profile.alpha;
  if (s.profile.kind == "tabulated") {
    p["tau"] = s.profile.tau;
    p["phi"] = s.profile.phi;
  }
  doc["profile"] = p;
  doc["kappa_max"] = extended(s.kappa_max);
  json f = {{"kind", s.field.kind}, {"gains", s.field.gains}, {"r", s.field.r}};
  if (s.field.kind == "canonical") {
    f["alpha"] = s.field.alpha;
    f["g"] = family_json(s.field.g);
    if (s.field.late_tau) f["late"] = {{"tau_switch", *s.field.late_tau}, {"g", family_json(s.field.late_g)}};
  }
  doc["field"] = f;
  doc["drift"] = {{"gains", s.drift.gains}, {"m", s.drift.m}};
  doc["L"] = s.L;
  doc["t0"] = s.t0;
  doc["x0"] = s.x0;
  doc["horizon"] = s.horizon;
  doc["step"] = {{"method", s.step.method == Method::RK4 ? "rk4" : "euler"},
                 {"h", s.step.h},
                 {"kappa_ref", s.step.kappa_ref},
                 {"kappa_power", s.step.kappa_power},
                 {"divergence_bound", s.step.divergence_bound}};
  doc["stride"] = s.step.stride;
  if (s.mode == "system") {
    json dist = {{"kind", s.disturbance.kind}};
    if (s.disturbance.kind != "zero") dist["terms"] = harmonic_json(s.disturbance.signal)["terms"];
    if (s.disturbance.kind == "signal_derivative") dist["order"] = s.disturbance.order;
    doc["disturbance"] = dist;
  } else {
    doc["signal"] = harmonic_json(s.signal);
    if (s.noise) doc["noise"] = harmonic_json(*s.noise);
    doc["n_d"] = s.n_d;
    if (s.sample_dt) doc["sample_dt"] = *s.sample_dt;
  }
  doc["settle"] = {{"epsilon", s.epsilon}, {"dwell", s.dwell}};
  if (s.T_max_star) doc["T_max_star"] = *s.T_max_star;
  return doc;
}

Scenario builtin_example(int id, bool noise) {
  Scenario s;
  s.mode = "differentiator";
  s.signal = example_signal();
  if (noise) s.noise = example_noise();
  s.n_d = 1;
  s.horizon = 10.0;
  s.step.h = 1e-5;
  s.step.stride = 100;
  s.profile.T_c = 1.0;
  s.name = "example" + std::to_string(id) + (noise ? "_noise" : "");

  switch (id) {
    case 1: {
      const double L = 2.2;
      const std::vector<double> l{-2 * std::cbrt(L), -2.12 * std::pow(L, 2.0 / 3), -1.1 * L};
      s.profile.kind = "rational";
      s.field.kind = "hosm";
      s.field.gains = l;
      s.drift = {l, 1.0};
      s.L = L;
      s.x0 = {100, 0, 0};
      s.kappa_max = 100;
      s.step.kappa_ref = 5;
      s.step.kappa_power = 3;
      break;
    }
    case 2: {
      const double L = 2.5;
      const double c1 = 2 * std::cbrt(L), c2 = 1.5 * std::sqrt(2.0) * std::pow(L, 4.0 / 6), c3 = 1.1 * L;
      // The auxiliary system needs tau ~ 14 to settle; a slow exponential keeps kappa there near 40.
      s.profile.kind = "exponential";
      s.profile.alpha = 0.1;
      s.field.kind = "canonical";
      s.field.gains = {-1, -1, -1};
      s.field.alpha = 0.1;
      s.field.g = {power(7, 1.02), power(15.0 / 7, 1.04), power(1, 1.06)};
      s.field.late_tau = 5.0;
      s.field.late_g = {power(c1, 2.0 / 3), power(c2, 1.0 / 3), power(c3, 0)};
      s.drift = {{-c1, -c2, -c3}, 1.0};
      s.L = L;
      s.x0 = {100, 0, 0};
      s.kappa_max = 50;
      s.step.kappa_ref = 5;
      s.step.kappa_power = 3;
      break;
    }
    case 3: {
      const double L = 2.5;
      s.profile.kind = "exponential";
      s.profile.alpha = 1.0;
      s.profile.T_f = 233.7349;
      s.field.kind = "canonical";
      s.field.gains = {-2 * std::sqrt(3.0), -6};
      s.field.alpha = 1.0;
      s.field.g = {PowerSum<double>{{{1, 0.5}, {1, 1.5}}}, PowerSum<double>{{{0.5, 0}, {2, 1}, {1.5, 2}}}};
      s.drift = {{-1.5 * std::sqrt(L), -1.1 * L}, 1.0};
      s.L = L;
      s.x0 = {100, 0};
      s.kappa_max = 1e3;
      s.step.kappa_ref = 10;
      s.step.kappa_power = 2;
      s.T_max_star = 233.7349;
      break;
    }
    default:
      throw std::invalid_argument("example id must be 1, 2 or 3, got " + std::to_string(id));
  }
  return s;
}

BlowUpProfile<double> build_profile(const Scenario& s) {
  using P = BlowUpProfile<double>;
  const auto& p = s.profile;
  if (p.kind == "exponential") return P(P::Exponential{p.alpha}, p.T_c, p.T_f, s.kappa_max);
  if (p.kind == "rational") return P(P::Rational{}, p.T_c, p.T_f, s.kappa_max);
  return P(P::Tabulated{p.tau, p.phi}, p.T_c, p.T_f, s.kappa_max);
}

SystemPair<double> build_system(const Scenario& s) {
  const int n = s.order();
  Vec<double> gains(n);
  for (int i = 0; i < n; ++i) gains(i) = s.field.gains[static_cast<std::size_t>(i)];
  Vec<double> drift(static_cast<Eigen::Index>(s.drift.gains.size()));
  for (Eigen::Index i = 0; i < drift.size(); ++i) drift(i) = s.drift.gains[static_cast<std::size_t>(i)];

  auto field = [&]() {
    if (s.field.kind == "linear") return CorrectionField<double>::linear(gains, s.field.r);
    if (s.field.kind == "hosm") return CorrectionField<double>::hosm(gains, s.field.r);
    std::optional<CorrectionField<double>::LateFamily> late;
    if (s.field.late_tau) late = CorrectionField<double>::LateFamily{*s.field.late_tau, s.field.late_g};
    return CorrectionField<double>::canonical(gains, s.field.g, s.field.alpha, s.field.r, late);
  }();
  return SystemPair<double>(build_profile(s), std::move(field), DriftG<double>(drift, s.drift.m), s.L, s.t0);
}

DisturbanceSignal<double> build_disturbance(const Scenario& s) {
  DisturbanceSignal<double> d;
  d.bound = s.L;
  if (s.mode == "differentiator") {
    // The error system is driven by -y^{(n_d + 1)}.
    HarmonicSignal<double> neg = s.signal;
    for (auto& t : neg.terms) t.amplitude = -t.amplitude;
    d.kind = DisturbanceSignal<double>::DerivativeOfSignal{neg, s.n_d + 1};
  } else if (s.disturbance.kind == "harmonic") {
    d.kind = DisturbanceSignal<double>::Harmonic{s.disturbance.signal};
  } else if (s.disturbance.kind == "signal_derivative") {
    d.kind = DisturbanceSignal<double>::DerivativeOfSignal{s.disturbance.signal, s.disturbance.order};
  }
  return d;
}

}  // namespace ptime::app

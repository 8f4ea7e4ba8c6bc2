#include "capguard/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace capguard {
namespace {

// "A_m: must be > 0" -> ("A_m", "must be > 0")
std::pair<std::string, std::string> split_field(const std::string& what) {
  const auto colon = what.find(": ");
  if (colon == std::string::npos || what.find(' ') < colon) return {"", what};
  return {what.substr(0, colon), what.substr(colon + 2)};
}

double positive(const nlohmann::json& s, const char* key, double fallback, const std::string& source) {
  if (!s.contains(key)) return fallback;
  const auto& v = s.at(key);
  if (!v.is_number()) throw ScenarioError(source, std::string("settings.") + key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d) || !(d > 0.0)) throw ScenarioError(source, std::string("settings.") + key, "must be > 0");
  return d;
}

ScenarioSettings parse_settings(const nlohmann::json& s, const std::string& source) {
  if (!s.is_object()) throw ScenarioError(source, "settings", "expected an object");
  static const std::set<std::string> known = {"abs_tol",        "rel_tol",        "initial_step",
                                              "max_step",       "barrier_horizon", "oracle_horizon",
                                              "grid",           "agreement_band", "membership_eps",
                                              "policy_band"};
  for (const auto& [key, value] : s.items()) {
    if (!known.count(key)) throw ScenarioError(source, "settings." + key, "unknown key");
  }
  ScenarioSettings out;
  out.tolerances.abs = positive(s, "abs_tol", out.tolerances.abs, source);
  out.tolerances.rel = positive(s, "rel_tol", out.tolerances.rel, source);
  out.tolerances.initial_step = positive(s, "initial_step", out.tolerances.initial_step, source);
  out.tolerances.max_step = positive(s, "max_step", out.tolerances.max_step, source);
  out.barrier_horizon = positive(s, "barrier_horizon", out.barrier_horizon, source);
  out.oracle_horizon = positive(s, "oracle_horizon", out.oracle_horizon, source);
  out.agreement_band = positive(s, "agreement_band", out.agreement_band, source);
  out.membership_eps = positive(s, "membership_eps", out.membership_eps, source);
  out.policy_band = positive(s, "policy_band", out.policy_band, source);
  if (s.contains("grid")) {
    const auto& g = s.at("grid");
    if (!g.is_number_integer() || g.get<long long>() < 2) {
      throw ScenarioError(source, "settings.grid", "expected an integer >= 2");
    }
    out.grid = g.get<std::size_t>();
  }
  return out;
}

}  // namespace

BarrierOptions ScenarioSettings::barrier_options() const {
  BarrierOptions o;
  o.tolerances = tolerances;
  o.horizon = barrier_horizon;
  return o;
}

OracleOptions ScenarioSettings::oracle_options() const {
  OracleOptions o;
  o.tolerances = tolerances;
  o.horizon = oracle_horizon;
  return o;
}

SimulateOptions ScenarioSettings::simulate_options() const {
  SimulateOptions o;
  o.tolerances = tolerances;
  o.closed_loop.band = policy_band;
  o.closed_loop.eps = membership_eps;
  return o;
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover line and column from the byte offset.
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ScenarioError(source, "line " + std::to_string(line) + ", column " + std::to_string(column),
                        "malformed JSON");
  }
  if (!j.is_object()) throw ScenarioError(source, "(root)", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "name" && key != "description" && key != "model" && key != "caps" && key != "settings") {
      throw ScenarioError(source, key, "unknown key");
    }
  }
  Scenario s;
  for (const char* key : {"name", "description"}) {
    if (!j.contains(key)) continue;
    if (!j.at(key).is_string()) throw ScenarioError(source, key, "expected a string");
    (std::string(key) == "name" ? s.name : s.description) = j.at(key).get<std::string>();
  }
  for (const char* key : {"model", "caps"}) {
    if (!j.contains(key)) throw ScenarioError(source, key, "missing");
  }
  try {
    s.model = model_params_from_json(j.at("model"));
  } catch (const std::invalid_argument& e) {
    const auto [field, message] = split_field(e.what());
    throw ScenarioError(source, field.empty() ? "model" : "model." + field, message);
  }
  try {
    s.caps = caps_from_json(j.at("caps"));
  } catch (const std::invalid_argument& e) {
    const auto [field, message] = split_field(e.what());
    throw ScenarioError(source, field.empty() ? "caps" : "caps." + field, message);
  }
  if (j.contains("settings")) s.settings = parse_settings(j.at("settings"), source);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(path, "(file)", "cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

nlohmann::json to_json(const Scenario& s) {
  const ScenarioSettings& st = s.settings;
  return {{"name", s.name},
          {"description", s.description},
          {"model", to_json(s.model)},
          {"caps", to_json(s.caps)},
          {"settings",
           {{"abs_tol", st.tolerances.abs},
            {"rel_tol", st.tolerances.rel},
            {"initial_step", st.tolerances.initial_step},
            {"max_step", st.tolerances.max_step},
            {"barrier_horizon", st.barrier_horizon},
            {"oracle_horizon", st.oracle_horizon},
            {"grid", st.grid},
            {"agreement_band", st.agreement_band},
            {"membership_eps", st.membership_eps},
            {"policy_band", st.policy_band}}}};
}

}  // namespace capguard

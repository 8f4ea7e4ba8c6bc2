#pragma once

// Scenario files: model parameters, caps and optional run settings as JSON.
//
//   {
//     "name": "...", "description": "...",
//     "model": {"A_m": .., "A_h": .., "gamma": .., "u_min": .., "u_max": ..},
//     "caps": {"xbar1": .., "xbar2": ..},
//     "settings": {"abs_tol", "rel_tol", "initial_step", "max_step",
//                  "barrier_horizon", "oracle_horizon", "grid",
//                  "agreement_band", "membership_eps", "policy_band"}
//   }

#include <cstddef>
#include <stdexcept>
#include <string>

#include "capguard/barrier.hpp"
#include "capguard/model.hpp"
#include "capguard/oracle.hpp"
#include "capguard/policy.hpp"

namespace capguard {

struct ScenarioSettings {
  ode::Tolerances tolerances{};
  double barrier_horizon = 10000.0;
  double oracle_horizon = 3000.0;
  std::size_t grid = 200;
  double agreement_band = 0.01;
  double membership_eps = kDefaultMembershipEps;
  double policy_band = 0.005;

  BarrierOptions barrier_options() const;
  OracleOptions oracle_options() const;
  SimulateOptions simulate_options() const;
};

struct Scenario {
  std::string name;
  std::string description;
  ModelParams model;
  ConstraintCaps caps;
  ScenarioSettings settings;
};

/// Validation failure with the offending location: "line L, column C" for
/// syntax errors, a dotted field path otherwise.
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(const std::string& source, const std::string& where, const std::string& message)
      : std::invalid_argument(source + ": " + where + ": " + message), where_(where) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario_file(const std::string& path);
nlohmann::json to_json(const Scenario& s);

}  // namespace capguard

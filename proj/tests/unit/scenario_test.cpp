#include "capguard/scenario.hpp"

#include <gtest/gtest.h>

#include "capguard/classifier.hpp"
#include "test_support.hpp"

namespace capguard {
namespace {

std::string where_of(const std::string& text) {
  try {
    parse_scenario(text, "test.json");
  } catch (const ScenarioError& e) {
    return e.where();
  }
  return "<no error>";
}

const char* kValid = R"({
  "name": "x",
  "model": {"A_m": 0.076608, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
  "caps": {"xbar1": 0.7, "xbar2": 0.2}
})";

TEST(Scenario, ShippedFilesLoadAndClassify) {
  const std::pair<const char*, Regime> expected[] = {
      {"cali_comfortable", Regime::Comfortable},
      {"cali_comfortable_viable", Regime::ComfortableViable},
      {"cali_viable", Regime::Viable},
      {"cali_desperate", Regime::Desperate},
  };
  for (const auto& [name, regime] : expected) {
    const Scenario s = load_scenario_file(testing::scenario_path(name));
    EXPECT_EQ(s.name, name);
    EXPECT_FALSE(s.description.empty());
    EXPECT_EQ(classify(s.model, s.caps).regime, regime) << name;
  }
}

TEST(Scenario, DefaultsAndSettings) {
  const Scenario s = parse_scenario(kValid);
  EXPECT_EQ(s.settings.grid, 200u);
  EXPECT_EQ(s.settings.oracle_horizon, 3000.0);
  EXPECT_EQ(s.caps.xbar2, 0.2);

  const Scenario t = parse_scenario(R"({
    "model": {"A_m": 0.076608, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
    "caps": {"xbar1": 0.7, "xbar2": 0.2},
    "settings": {"grid": 50, "oracle_horizon": 1000, "abs_tol": 1e-9, "policy_band": 0.01}
  })");
  EXPECT_EQ(t.settings.grid, 50u);
  EXPECT_EQ(t.settings.oracle_options().horizon, 1000.0);
  EXPECT_EQ(t.settings.tolerances.abs, 1e-9);
  EXPECT_EQ(t.settings.simulate_options().closed_loop.band, 0.01);
}

TEST(Scenario, ErrorLocations) {
  EXPECT_EQ(where_of("{\n  \"name\": \"x\",\n  oops\n}"), "line 3, column 3");
  EXPECT_EQ(where_of("[1, 2]"), "(root)");
  EXPECT_EQ(where_of(R"({"model": {}, "caps": {}, "extra": 1})"), "extra");
  EXPECT_EQ(where_of(R"({"caps": {"xbar1": 0.7, "xbar2": 0.2}})"), "model");
  EXPECT_EQ(where_of(R"({
    "model": {"A_m": -0.1, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
    "caps": {"xbar1": 0.7, "xbar2": 0.2}})"),
            "model.A_m");
  EXPECT_EQ(where_of(R"({
    "model": {"A_m": 0.07, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
    "caps": {"xbar1": 1.5, "xbar2": 0.2}})"),
            "caps.xbar1");
  EXPECT_EQ(where_of(R"({
    "model": {"A_m": 0.07, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
    "caps": {"xbar1": 0.5, "xbar2": 0.2}, "settings": {"grid": 1}})"),
            "settings.grid");
  EXPECT_EQ(where_of(R"({
    "model": {"A_m": 0.07, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
    "caps": {"xbar1": 0.5, "xbar2": 0.2}, "settings": {"speed": 1}})"),
            "settings.speed");
  EXPECT_EQ(where_of(R"({
    "model": {"A_m": 0.07, "A_h": 0.0722633, "gamma": 0.1, "u_min": 0.0333, "u_max": 0.05},
    "caps": {"xbar1": 0.5, "xbar2": 0.2}, "settings": {"abs_tol": -1}})"),
            "settings.abs_tol");
  EXPECT_THROW(load_scenario_file("/nonexistent/file.json"), ScenarioError);
}

TEST(Scenario, MessagesNameTheSource) {
  try {
    parse_scenario("{", "bad.json");
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("bad.json: line 1", 0), 0u) << e.what();
  }
}

TEST(Scenario, JsonRoundTrip) {
  const Scenario s = load_scenario_file(testing::scenario_path("cali_viable"));
  const Scenario back = parse_scenario(to_json(s).dump());
  EXPECT_EQ(back.name, s.name);
  EXPECT_EQ(back.model.A_m, s.model.A_m);
  EXPECT_EQ(back.caps.xbar1, s.caps.xbar1);
  EXPECT_EQ(back.settings.grid, s.settings.grid);
  EXPECT_EQ(to_json(back).dump(), to_json(s).dump());
}

}  // namespace
}  // namespace capguard

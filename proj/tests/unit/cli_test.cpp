#include "capguard/cli.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "test_support.hpp"

namespace capguard {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "capguard");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("capguard_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

const std::string kCv = testing::scenario_path("cali_comfortable_viable");
const std::string kDesperate = testing::scenario_path("cali_desperate");

TEST(Cli, ClassifyText) {
  const CliRun r = run({"classify", testing::scenario_path("cali_desperate")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("case: desperate"), std::string::npos);
  EXPECT_NE(r.out.find("entry_g3_admissible lhs="), std::string::npos);
}

TEST(Cli, ClassifyJson) {
  const CliRun r = run({"classify", "--json", kCv});
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("case"), "comfortable_viable");
}

TEST(Cli, BarrierWritesCsvAndJson) {
  TempDir dir;
  const CliRun r = run({"barrier", kCv, "--set", "mrpi", "--out", (dir.path() / "b.csv").string(), "--json-out",
                     (dir.path() / "b.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("verification passed"), std::string::npos);
  EXPECT_EQ(slurp(dir.path() / "b.csv").rfind("s,x1,x2,lambda1,lambda2,u\n", 0), 0u);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir.path() / "b.json")).at("set_kind"), "mrpi");
}

TEST(Cli, BarrierOnDesperateIsAValidationError) {
  const CliRun r = run({"barrier", kDesperate, "--set", "admissible"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, RegionExportsAreDeterministic) {
  TempDir a;
  TempDir b;
  ASSERT_EQ(run({"region", kCv, "--out-dir", a.path().string()}).code, 0);
  ASSERT_EQ(run({"region", kCv, "--out-dir", b.path().string()}).code, 0);
  for (const char* name : {"admissible.json", "admissible.csv", "mrpi.json", "mrpi.csv", "summary.json"}) {
    const std::string first = slurp(a.path() / name);
    EXPECT_FALSE(first.empty()) << name;
    EXPECT_EQ(first, slurp(b.path() / name)) << name;
  }
  const auto summary = nlohmann::json::parse(slurp(a.path() / "summary.json"));
  EXPECT_NEAR(summary.at("efficiency_ratio").get<double>(), 0.842785, 1e-5);
}

TEST(Cli, RegionReportsDesperateRatio) {
  TempDir dir;
  const CliRun r = run({"region", kDesperate, "--out-dir", dir.path().string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("efficiency_ratio: desperate"), std::string::npos);
}

TEST(Cli, OracleGrid) {
  TempDir dir;
  const CliRun r = run({"oracle", testing::scenario_path("cali_viable"), "--grid", "10", "--horizon", "500", "--out",
                     (dir.path() / "g.csv").string(), "--pgm", (dir.path() / "g.pgm").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("grid 10x10"), std::string::npos);
  EXPECT_EQ(slurp(dir.path() / "g.pgm").rfind("P2\n", 0), 0u);
}

TEST(Cli, VerifyPasses) {
  TempDir dir;
  const CliRun r = run({"verify", kCv, "--grid", "40", "--json-out", (dir.path() / "v.json").string()});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("verify: pass"), std::string::npos);
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir.path() / "v.json")).at("passed").get<bool>());
}

TEST(Cli, SimulateReportsViolation) {
  const CliRun r = run({"simulate", kCv, "--x0", "0.69,0.19", "--u", "const:0.05", "--horizon", "50"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("t,x1,x2,u,violated_face\n", 0), 0u);
  EXPECT_NE(r.err.find("violation of G3"), std::string::npos);
  const CliRun p = run({"simulate", kCv, "--x0", "0.1,0.1", "--u", "policy", "--horizon", "20"});
  EXPECT_EQ(p.code, 0);
  EXPECT_TRUE(p.err.empty());
}

TEST(Cli, SimulateFromTheOriginStaysThere) {
  const CliRun r = run({"simulate", testing::scenario_path("cali_comfortable"), "--x0", "0,0", "--u", "const:0.04",
                        "--horizon", "10"});
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_NE(line.find(",0,0,0.040000000000000001,"), std::string::npos) << line;
  }
  EXPECT_GE(rows, 11);
}

TEST(Cli, VerifyViableWithDefaultSettings) {
  const CliRun r = run({"verify", testing::scenario_path("cali_viable")});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("oracle 200x200"), std::string::npos) << r.out;
}

TEST(Cli, Advise) {
  const CliRun r = run({"advise", kCv, "--x", "0.1,0.1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("action"), "use_min");
  EXPECT_EQ(nlohmann::json::parse(run({"advise", kDesperate, "--x", "0.1,0.01"}).out).at("action"),
            "relax_caps_or_increase_fumigation");
}

TEST(Cli, ValidationErrors) {
  EXPECT_EQ(run({"classify", "/nonexistent.json"}).code, 1);
  EXPECT_EQ(run({"advise", kCv, "--x", "2,0.1"}).code, 1);
  EXPECT_EQ(run({"advise", kCv, "--x", "abc"}).code, 1);
  EXPECT_EQ(run({"simulate", kCv, "--x0", "0.1,0.1", "--u", "const:0.2", "--horizon", "5"}).code, 1);
  EXPECT_EQ(run({"simulate", kCv, "--x0", "0.1,0.1", "--u", "sometimes", "--horizon", "5"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  TempDir dir;
  const fs::path bad = dir.path() / "bad.json";
  std::ofstream(bad) << R"({"model": {"A_m": 0.1}, "caps": {"xbar1": 0.5, "xbar2": 0.5}})";
  const CliRun r = run({"classify", bad.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("model."), std::string::npos) << r.err;
}

TEST(Cli, HelpExitsCleanly) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST(Cli, BinaryExitCodes) {
  const std::string bin = CAPGUARD_CLI;
  auto status = [](const std::string& cmd) {
    const int s = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status(bin + " classify " + kCv), 0);
  EXPECT_EQ(status(bin + " classify /nonexistent.json"), 1);
}

}  // namespace
}  // namespace capguard

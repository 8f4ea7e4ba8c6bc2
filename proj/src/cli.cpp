#include "capguard/cli.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "capguard/analysis.hpp"
#include "capguard/oracle.hpp"
#include "capguard/policy.hpp"
#include "capguard/scenario.hpp"
#include "capguard/service.hpp"

namespace capguard {
namespace {

double parse_double(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v)) {
    throw std::invalid_argument(what + ": '" + text + "' is not a number");
  }
  return v;
}

State parse_pair(const std::string& text, const std::string& what) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw std::invalid_argument(what + ": expected 'a,b'");
  return State{parse_double(text.substr(0, comma), what), parse_double(text.substr(comma + 1), what)};
}

void write_text(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

struct Options {
  std::string scenario;
  bool json = false;
  std::string set = "admissible";
  std::string out;
  std::string json_out;
  std::string out_dir;
  std::size_t grid = 0;
  std::string pgm;
  std::string x0;
  std::string x;
  std::string u;
  double horizon = 0.0;
  double eps = kDefaultMembershipEps;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int cmd_classify(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario_file(o.scenario);
  const Classification cls = classify(s.model, s.caps);
  out << (o.json ? dump(to_json(cls)) : format_report(cls));
  return kExitOk;
}

int cmd_barrier(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = load_scenario_file(o.scenario);
  const SetKind kind = set_kind_from_string(o.set);
  std::optional<BarrierCurve> curve;
  try {
    curve = compute_barrier(s.model, s.caps, kind, s.settings.barrier_options());
  } catch (const BarrierPreconditionError& e) {
    throw std::invalid_argument(e.what());
  }
  if (!curve) {
    throw std::invalid_argument(std::string("no ") + to_string(kind) + " barrier: " +
                                "no tangent point of this kind enters the constraint set");
  }
  write_text(o.out, barrier_csv(*curve), out);
  if (!o.json_out.empty()) write_text(o.json_out, dump(to_json(*curve)), out);
  const BarrierVerification v = verify_barrier(*curve, s.model, s.caps);
  err << to_string(kind) << " barrier: " << curve->samples.size() << " samples, "
      << curve->switches.size() << " switches, termination " << to_string(curve->termination.kind)
      << ", verification " << (v.passed() ? "passed" : "FAILED") << "\n";
  for (const auto& f : v.failures()) err << "  " << f << "\n";
  return v.passed() ? kExitOk : kExitVerification;
}

int cmd_region(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario_file(o.scenario);
  const Analysis a = analyze(s.model, s.caps, s.settings.barrier_options());
  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  for (const RegionSet* r : {&a.admissible, &a.mrpi}) {
    const std::string stem = to_string(r->kind);
    write_text((dir / (stem + ".json")).string(), dump(to_json(*r)), out);
    write_text((dir / (stem + ".csv")).string(), region_csv(*r), out);
  }
  const auto ratio = a.efficiency_ratio();
  const nlohmann::json summary = {
      {"case", to_string(a.classification.regime)},
      {"admissible_area", a.admissible.area},
      {"mrpi_area", a.mrpi.area},
      {"efficiency_ratio", ratio ? nlohmann::json(*ratio) : nlohmann::json("desperate")}};
  write_text((dir / "summary.json").string(), dump(summary), out);
  out << "case: " << to_string(a.classification.regime) << "\n";
  out << "efficiency_ratio: " << (ratio ? nlohmann::json(*ratio).dump() : std::string("desperate")) << "\n";
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = load_scenario_file(o.scenario);
  const std::size_t n = o.grid ? o.grid : s.settings.grid;
  OracleOptions opts = s.settings.oracle_options();
  if (o.horizon > 0.0) opts.horizon = o.horizon;
  const GridVerdict v = grid_membership(s.model, s.caps, n, n, opts);
  write_text(o.out, verdict_csv(v), out);
  if (!o.pgm.empty()) write_text(o.pgm, verdict_pgm(v), out);
  std::size_t adm = 0;
  std::size_t inv = 0;
  for (std::size_t k = 0; k < v.admissible.size(); ++k) {
    adm += v.admissible[k];
    inv += v.invariant[k];
  }
  err << "grid " << n << "x" << n << ": " << adm << " admissible, " << inv << " invariant\n";
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario_file(o.scenario);
  const Analysis a = analyze(s.model, s.caps, s.settings.barrier_options());
  bool ok = true;
  nlohmann::json report = {{"case", to_string(a.classification.regime)}};
  out << "case: " << to_string(a.classification.regime) << "\n";

  for (const auto* curve : {&a.admissible_barrier, &a.mrpi_barrier}) {
    if (!*curve) continue;
    const BarrierVerification v = verify_barrier(**curve, s.model, s.caps);
    ok = ok && v.passed();
    report[std::string("barrier_") + to_string((*curve)->set_kind)] = to_json(v);
    out << to_string((*curve)->set_kind) << " barrier: " << (v.passed() ? "pass" : "FAIL") << "\n";
    for (const auto& f : v.failures()) out << "  " << f << "\n";
  }

  bool inclusion = true;
  if (!a.mrpi.degenerate()) {
    for (const State& v : a.mrpi.polygon) inclusion = inclusion && contains(a.admissible, v, s.settings.membership_eps).in_closure();
  } else {
    inclusion = contains(a.admissible, State{0.0, 0.0}, s.settings.membership_eps).in_closure();
  }
  ok = ok && inclusion;
  report["mrpi_subset_of_admissible"] = inclusion;
  out << "mrpi inside admissible: " << (inclusion ? "pass" : "FAIL") << "\n";

  const bool simple = polygon_is_simple(a.admissible.polygon) && polygon_is_simple(a.mrpi.polygon);
  ok = ok && simple;
  report["polygons_simple"] = simple;
  out << "simple polygons: " << (simple ? "pass" : "FAIL") << "\n";

  const std::size_t n = o.grid ? o.grid : s.settings.grid;
  const GridVerdict g = grid_membership(s.model, s.caps, n, n, s.settings.oracle_options());
  const Comparison c = compare(g, a.admissible, a.mrpi, s.settings.agreement_band, s.settings.membership_eps);
  ok = ok && c.passed();
  report["oracle"] = to_json(c);
  char line[160];
  std::snprintf(line, sizeof line, "oracle %zux%zu: admissible %.4f (off-band %.4f), mrpi %.4f (off-band %.4f): %s\n",
                n, n, c.admissible.fraction(), c.admissible.off_band_fraction(), c.mrpi.fraction(),
                c.mrpi.off_band_fraction(), c.passed() ? "pass" : "FAIL");
  out << line;
  report["passed"] = ok;
  if (!o.json_out.empty()) write_text(o.json_out, dump(report), out);
  out << (ok ? "verify: pass\n" : "verify: FAIL\n");
  return ok ? kExitOk : kExitVerification;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const Scenario s = load_scenario_file(o.scenario);
  const State x0 = parse_pair(o.x0, "--x0");
  if (!(o.horizon > 0.0)) throw std::invalid_argument("--horizon: must be > 0");
  Trajectory traj;
  if (o.u == "policy") {
    const Analysis a = analyze(s.model, s.caps, s.settings.barrier_options());
    const PolicyContext ctx = PolicyContext::from(a);
    traj = simulate(s.model, s.caps, x0, InputSource::closed_loop(ctx), o.horizon, s.settings.simulate_options());
  } else if (o.u.rfind("const:", 0) == 0) {
    const double u = parse_double(o.u.substr(6), "--u");
    traj = simulate(s.model, s.caps, x0, InputSource::constant(u), o.horizon, s.settings.simulate_options());
  } else {
    throw std::invalid_argument("--u: expected const:<value> or policy");
  }
  write_text(o.out, trajectory_csv(traj), out);
  if (traj.violation) {
    err << "violation of " << to_string(traj.violation->face) << " at t=" << traj.violation->t << "\n";
  }
  return kExitOk;
}

int cmd_advise(const Options& o, std::ostream& out) {
  const Scenario s = load_scenario_file(o.scenario);
  const State x = parse_pair(o.x, "--x");
  const Analysis a = analyze(s.model, s.caps, s.settings.barrier_options());
  const PolicyAdvice advice = recommend(x, PolicyContext::from(a), o.eps);
  out << dump(to_json(advice));
  return kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  Api api(load_scenario_file(o.scenario));
  HttpService http(api);
  const int port = http.bind(o.host, o.port);
  out << "serving " << o.scenario << " on http://" << o.host << ":" << port << "\n" << std::flush;
  http.listen();
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Infection-cap analysis for the input-constrained Ross-Macdonald model", "capguard"};
  app.require_subcommand(1);
  Options o;

  auto scenario_arg = [&o](CLI::App* sub) {
    sub->add_option("scenario", o.scenario, "Scenario JSON file")->required();
  };

  auto* classify_cmd = app.add_subcommand("classify", "Print the regime and every evaluated inequality");
  scenario_arg(classify_cmd);
  classify_cmd->add_flag("--json", o.json, "Emit JSON instead of text");

  auto* barrier_cmd = app.add_subcommand("barrier", "Trace and verify one barrier curve");
  scenario_arg(barrier_cmd);
  barrier_cmd->add_option("--set", o.set, "admissible or mrpi")
      ->check(CLI::IsMember({"admissible", "mrpi"}))
      ->required();
  barrier_cmd->add_option("--out", o.out, "CSV output (default stdout)");
  barrier_cmd->add_option("--json-out", o.json_out, "Also write the curve as JSON");

  auto* region_cmd = app.add_subcommand("region", "Build both regions and write JSON/CSV exports");
  scenario_arg(region_cmd);
  region_cmd->add_option("--out-dir", o.out_dir, "Output directory")->required();

  auto* oracle_cmd = app.add_subcommand("oracle", "Grid membership by forward simulation");
  scenario_arg(oracle_cmd);
  oracle_cmd->add_option("--grid", o.grid, "Points per axis")->check(CLI::Range(2, 5000));
  oracle_cmd->add_option("--horizon", o.horizon, "Simulation horizon in days");
  oracle_cmd->add_option("--out", o.out, "CSV output (default stdout)");
  oracle_cmd->add_option("--pgm", o.pgm, "Also write a PGM grid dump");

  auto* verify_cmd = app.add_subcommand("verify", "Check barriers, inclusion and oracle agreement");
  scenario_arg(verify_cmd);
  verify_cmd->add_option("--grid", o.grid, "Points per axis")->check(CLI::Range(2, 5000));
  verify_cmd->add_option("--json-out", o.json_out, "Write the full report as JSON");

  auto* simulate_cmd = app.add_subcommand("simulate", "Forward simulation");
  scenario_arg(simulate_cmd);
  simulate_cmd->add_option("--x0", o.x0, "Initial state a,b")->required();
  simulate_cmd->add_option("--u", o.u, "const:<value> or policy")->required();
  simulate_cmd->add_option("--horizon", o.horizon, "Days")->required();
  simulate_cmd->add_option("--out", o.out, "CSV output (default stdout)");

  auto* advise_cmd = app.add_subcommand("advise", "Fumigation advice at one state");
  scenario_arg(advise_cmd);
  advise_cmd->add_option("--x", o.x, "State a,b")->required();
  advise_cmd->add_option("--eps", o.eps, "Boundary band")->check(CLI::PositiveNumber);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
  scenario_arg(serve_cmd);
  serve_cmd->add_option("--host", o.host, "Bind address");
  serve_cmd->add_option("--port", o.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*classify_cmd) return cmd_classify(o, out);
    if (*barrier_cmd) return cmd_barrier(o, out, err);
    if (*region_cmd) return cmd_region(o, out);
    if (*oracle_cmd) return cmd_oracle(o, out, err);
    if (*verify_cmd) return cmd_verify(o, out);
    if (*simulate_cmd) return cmd_simulate(o, out, err);
    if (*advise_cmd) return cmd_advise(o, out);
    if (*serve_cmd) return cmd_serve(o, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return kExitVerification;
  }
  return kExitValidation;
}

}  // namespace capguard

#include "capguard/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <stdexcept>

#include "httplib.h"

namespace capguard {
namespace {

const std::regex kSessionPath(R"(^/api/session/([A-Za-z0-9_-]+)(/step|/reset)?$)");

State parse_point(const nlohmann::json& v, const std::string& field) {
  double x1 = 0.0;
  double x2 = 0.0;
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    x1 = v[0].get<double>();
    x2 = v[1].get<double>();
  } else if (v.is_object() && v.contains("x1") && v.contains("x2") && v["x1"].is_number() && v["x2"].is_number()) {
    x1 = v["x1"].get<double>();
    x2 = v["x2"].get<double>();
  } else {
    throw std::invalid_argument(field + ": expected [x1, x2] or {\"x1\", \"x2\"}");
  }
  if (!std::isfinite(x1) || !std::isfinite(x2) || x1 < 0.0 || x1 > 1.0 || x2 < 0.0 || x2 > 1.0) {
    throw std::invalid_argument(field + ": must lie in [0,1]^2");
  }
  return State{x1, x2};
}

nlohmann::json parse_body(const std::string& body) {
  if (body.empty()) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(body);  // parse_error handled by the caller
  if (!j.is_object()) throw std::invalid_argument("body: expected a JSON object");
  return j;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw std::invalid_argument(key + ": unknown key");
    }
  }
}

nlohmann::json violation_json(const Violation& v) {
  return {{"t", v.t}, {"face", to_string(v.face)}, {"x1", v.state.x1}, {"x2", v.state.x2}};
}

const char* to_string(SessionMode m) { return m == SessionMode::Manual ? "manual" : "policy"; }

}  // namespace

ApiResponse api_error(int status, const std::string& code, const std::string& message) {
  return ApiResponse{status, {{"code", code}, {"message", message}}};
}

Api::Api(Scenario scenario, std::size_t max_sessions)
    : scenario_(std::move(scenario)), max_sessions_(std::max<std::size_t>(1, max_sessions)) {
  analysis_ = analyze(scenario_.model, scenario_.caps, scenario_.settings.barrier_options());
  policy_ = PolicyContext::from(analysis_);
  sim_options_ = scenario_.settings.simulate_options();

  scenario_json_ = to_json(scenario_);
  classification_json_ = to_json(analysis_.classification);
  const auto ratio = analysis_.efficiency_ratio();
  const bool desperate = analysis_.classification.regime == Regime::Desperate;
  regions_json_ = {{"case", to_string(analysis_.classification.regime)},
                   {"admissible", to_json(analysis_.admissible)},
                   {"mrpi", to_json(analysis_.mrpi)},
                   {"efficiency_ratio", ratio ? nlohmann::json(*ratio) : nlohmann::json("desperate")},
                   {"advice", desperate ? nlohmann::json("desperate") : nlohmann::json(nullptr)}};
  barriers_json_ = {
      {"admissible", analysis_.admissible_barrier ? to_json(*analysis_.admissible_barrier) : nlohmann::json(nullptr)},
      {"mrpi", analysis_.mrpi_barrier ? to_json(*analysis_.mrpi_barrier) : nlohmann::json(nullptr)}};
}

std::size_t Api::session_count() const {
  std::lock_guard<std::mutex> lock(sessions_mutex_);
  return sessions_.size();
}

ApiResponse Api::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    if (method == "GET") {
      if (path == "/api/scenario") return {200, scenario_json_};
      if (path == "/api/classification") return {200, classification_json_};
      if (path == "/api/regions") return {200, regions_json_};
      if (path == "/api/barriers") return {200, barriers_json_};
    }
    if (path == "/api/session") {
      if (method != "POST") return api_error(405, "method_not_allowed", "use POST to create a session");
      return create_session(parse_body(body));
    }
    std::smatch m;
    if (std::regex_match(path, m, kSessionPath)) {
      const std::string action = m[2].str();
      if ((action.empty() && method != "GET") || (!action.empty() && method != "POST")) {
        return api_error(405, "method_not_allowed", method + " not allowed on " + path);
      }
      auto session = find_session(m[1].str());
      if (!session) return api_error(404, "unknown_session", "no session '" + m[1].str() + "'");
      std::lock_guard<std::mutex> lock(session->mutex);
      if (action == "/step") return step_session(*session, parse_body(body));
      if (action == "/reset") return reset_session(*session, parse_body(body));
      return describe_session(*session);
    }
    return api_error(404, "not_found", "no route for " + method + " " + path);
  } catch (const nlohmann::json::exception& e) {
    return api_error(400, "bad_request", std::string("malformed JSON body: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return api_error(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return api_error(500, "internal", e.what());
  }
}

std::shared_ptr<Api::Session> Api::find_session(const std::string& id) {
  std::lock_guard<std::mutex> lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second.second);
  return it->second.first;
}

void Api::restart(Session& s, const State& x0) {
  s.x0 = x0;
  s.sim = std::make_unique<Simulator>(scenario_.model, scenario_.caps, x0, sim_options_);
  s.history = Trajectory{};
  s.history.samples.push_back(TrajectorySample{0.0, x0, 0.0});
  if (box_violation(x0, scenario_.caps) > sim_options_.violation_tol) {
    s.history.violation = Violation{0.0, most_violated_face(x0, scenario_.caps), x0};
  }
  s.last_u = 0.0;
}

ApiResponse Api::create_session(const nlohmann::json& body) {
  reject_unknown(body, {"x0", "mode"});
  if (!body.contains("x0")) throw std::invalid_argument("x0: missing required field");
  const State x0 = parse_point(body.at("x0"), "x0");
  SessionMode mode = SessionMode::Manual;
  if (body.contains("mode")) {
    const auto& m = body.at("mode");
    if (m == "manual") {
      mode = SessionMode::Manual;
    } else if (m == "policy") {
      mode = SessionMode::Policy;
    } else {
      throw std::invalid_argument("mode: expected \"manual\" or \"policy\"");
    }
  }
  auto session = std::make_shared<Session>();
  session->mode = mode;
  restart(*session, x0);

  std::lock_guard<std::mutex> lock(sessions_mutex_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%08llx", static_cast<unsigned long long>(next_id_++));
  session->id = buf;
  lru_.push_front(session->id);
  sessions_.emplace(session->id, std::make_pair(session, lru_.begin()));
  while (sessions_.size() > max_sessions_) {
    sessions_.erase(lru_.back());
    lru_.pop_back();
  }
  return {201, {{"id", session->id}, {"mode", to_string(mode)}, {"state", {{"x1", x0.x1}, {"x2", x0.x2}}}}};
}

nlohmann::json Api::session_state(const Session& s) const {
  const State& x = s.sim->state();
  const State clamped{std::clamp(x.x1, 0.0, 1.0), std::clamp(x.x2, 0.0, 1.0)};
  const PolicyAdvice advice = recommend(clamped, policy_, scenario_.settings.membership_eps);
  nlohmann::json j = {{"id", s.id},
                      {"mode", to_string(s.mode)},
                      {"t", s.sim->time()},
                      {"state", {{"x1", x.x1}, {"x2", x.x2}}},
                      {"u", s.last_u},
                      {"advice", to_json(advice)},
                      {"membership", {{"admissible", to_json(advice.admissible)}, {"mrpi", to_json(advice.mrpi)}}}};
  j["violation"] = s.history.violation ? violation_json(*s.history.violation) : nlohmann::json(nullptr);
  return j;
}

ApiResponse Api::step_session(Session& s, const nlohmann::json& body) {
  reject_unknown(body, {"u", "dt"});
  if (s.history.violation) {
    ApiResponse r = api_error(409, "violated", "the session state has already violated a cap; reset it");
    r.body["violation"] = violation_json(*s.history.violation);
    return r;
  }
  if (!body.contains("dt") || !body.at("dt").is_number()) throw std::invalid_argument("dt: expected a number");
  const double dt = body.at("dt").get<double>();
  if (!std::isfinite(dt) || !(dt > 0.0) || dt > kMaxStepDays) {
    throw std::invalid_argument("dt: must lie in (0, 10] days");
  }
  const ModelParams& p = scenario_.model;
  bool clamped = false;
  InputSource source;
  if (s.mode == SessionMode::Manual) {
    if (!body.contains("u") || !body.at("u").is_number()) throw std::invalid_argument("u: expected a number");
    const double raw = body.at("u").get<double>();
    if (!std::isfinite(raw)) throw std::invalid_argument("u: must be finite");
    const double u = std::clamp(raw, p.u_min, p.u_max);
    clamped = u != raw;
    source = InputSource::constant(u);
  } else {
    source = InputSource::closed_loop(policy_);
  }
  s.sim->advance(dt, source, s.history);
  s.last_u = s.history.samples.back().u;
  nlohmann::json j = session_state(s);
  j["clamped"] = clamped;
  return {200, j};
}

ApiResponse Api::reset_session(Session& s, const nlohmann::json& body) {
  reject_unknown(body, {"x0"});
  const State x0 = body.contains("x0") ? parse_point(body.at("x0"), "x0") : s.x0;
  restart(s, x0);
  return {200, session_state(s)};
}

ApiResponse Api::describe_session(Session& s) {
  nlohmann::json j = session_state(s);
  j["history"] = to_json(s.history);
  return {200, j};
}

struct HttpService::Impl {
  httplib::Server server;
};

HttpService::HttpService(Api& api) : impl_(std::make_unique<Impl>()) {
  auto forward = [&api](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = api.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto& server = impl_->server;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw std::runtime_error("serve: cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace capguard

#pragma once

// HTTP/JSON facade for the steering UI.
//
// Api answers requests without touching sockets so it can be exercised
// directly; serve() binds it to an HTTP server. Scenario artifacts are computed
// once at construction and never change; sessions are the only mutable state.

#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "capguard/analysis.hpp"
#include "capguard/policy.hpp"
#include "capguard/scenario.hpp"

namespace capguard {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

enum class SessionMode { Manual, Policy };

class Api {
 public:
  static constexpr std::size_t kDefaultMaxSessions = 1024;
  static constexpr double kMaxStepDays = 10.0;

  explicit Api(Scenario scenario, std::size_t max_sessions = kDefaultMaxSessions);

  /// method is "GET" or "POST"; body is the raw request body.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

  const Analysis& analysis() const { return analysis_; }
  std::size_t session_count() const;

 private:
  struct Session {
    std::mutex mutex;
    std::string id;
    SessionMode mode = SessionMode::Manual;
    State x0;
    std::unique_ptr<Simulator> sim;
    Trajectory history;
    double last_u = 0.0;
  };

  ApiResponse create_session(const nlohmann::json& body);
  ApiResponse step_session(Session& s, const nlohmann::json& body);
  ApiResponse reset_session(Session& s, const nlohmann::json& body);
  ApiResponse describe_session(Session& s);
  std::shared_ptr<Session> find_session(const std::string& id);
  void restart(Session& s, const State& x0);
  nlohmann::json session_state(const Session& s) const;

  Scenario scenario_;
  Analysis analysis_;
  PolicyContext policy_;
  SimulateOptions sim_options_;
  nlohmann::json scenario_json_;
  nlohmann::json classification_json_;
  nlohmann::json regions_json_;
  nlohmann::json barriers_json_;

  std::size_t max_sessions_;
  mutable std::mutex sessions_mutex_;
  std::uint64_t next_id_ = 1;
  std::list<std::string> lru_;  // most recently used at the front
  std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> sessions_;
};

/// Error body {"code", "message"}.
ApiResponse api_error(int status, const std::string& code, const std::string& message);

/// HTTP binding of an Api with permissive CORS headers.
class HttpService {
 public:
  explicit HttpService(Api& api);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds host:port (port 0 picks a free port) and returns the bound port.
  /// Throws std::runtime_error when binding fails.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace capguard

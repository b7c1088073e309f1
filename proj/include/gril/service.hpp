#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gril/core.hpp"
#include "gril/env.hpp"
#include "gril/judge.hpp"
#include "gril/serialize.hpp"

namespace httplib {
class Server;
}

namespace gril {

/// Error surfaced to service clients as {error, detail} with an HTTP status.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string error, Json detail = Json::object())
      : std::runtime_error(error), status_(status), error_(std::move(error)), detail_(std::move(detail)) {}

  int status() const noexcept { return status_; }
  Json body() const { return Json{{"error", error_}, {"detail", detail_}}; }

 private:
  int status_;
  std::string error_;
  Json detail_;
};

/// Append-only newline-delimited trajectory file. Thread-safe; a default
/// constructed log discards everything.
class TrajectoryLog {
 public:
  TrajectoryLog() = default;
  explicit TrajectoryLog(const std::filesystem::path& path);

  void append(const Trajectory& t);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct SessionDefaults {
  EnvConfig env;
  RewardConfig reward;
  JudgeConfig judge;
  std::chrono::seconds ttl{3600};
};

/// Owns live and recently finished sessions. Each session is single-writer:
/// a step that finds the session busy fails with 409 instead of waiting.
class SessionManager {
 public:
  using Clock = std::chrono::system_clock;
  using ClockFn = std::function<Clock::time_point()>;

  SessionManager(std::vector<Problem> dataset, SessionDefaults defaults,
                 std::shared_ptr<TrajectoryLog> log = std::make_shared<TrajectoryLog>(),
                 ClockFn clock = {});

  /// Body: {"problem_ref": id} or {"problem": {...}}, optional "overrides".
  /// Returns {session_id, created_at, problem_id, messages, turn, max_turns}.
  Json create(const Json& request);

  /// Returns {session_id, turn, feedback, event, action, turn_reward, done,
  /// outcome, trajectory}; trajectory is present once done.
  Json step(const std::string& session_id, const std::string& assistant_text);

  /// Live-partial or final trajectory.
  Trajectory trajectory(const std::string& session_id);

  Json problem(const std::string& problem_id) const;

  /// Drops finished sessions older than the TTL.
  void evict_expired();

  /// Logs every live session as an interrupted partial trajectory and forgets them.
  int drain();

  std::size_t size() const;

 private:
  struct Session {
    std::string id;
    Clock::time_point created_at;
    std::optional<Clock::time_point> finished_at;
    EnvConfig env;
    RewardConfig reward;
    JudgeConfig judge;
    SessionState state;
    std::mutex mu;
  };

  std::shared_ptr<Session> find(const std::string& id);
  std::string new_id();

  std::unordered_map<std::string, Problem> problems_;
  SessionDefaults defaults_;
  std::shared_ptr<TrajectoryLog> log_;
  ClockFn clock_;

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::unordered_set<std::string> evicted_;
  std::uint64_t counter_ = 0;
  std::uint64_t id_salt_;
};

/// HTTP front end:
///   POST /v1/sessions
///   POST /v1/sessions/{id}/step
///   GET  /v1/sessions/{id}/trajectory
///   GET  /v1/problems/{id}
///   GET  /v1/healthz
class HttpService {
 public:
  explicit HttpService(SessionManager& sessions);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds and serves until stop(); returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port; returns it, or -1 on failure. Call listen_after_bind() next.
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  SessionManager& sessions_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace gril

#include "gril/service.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "gril/errors.hpp"
#include "gril/rng.hpp"
#include "gril/settings.hpp"

namespace gril {

namespace {

std::string iso8601(SessionManager::Clock::time_point tp) {
  const std::time_t t = SessionManager::Clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json optional_message(const std::optional<Message>& m) { return m ? to_json(*m) : Json(nullptr); }

ServiceError not_found_session(const std::string& id, bool evicted) {
  Json detail{{"session_id", id}};
  if (evicted) detail["hint"] = "session finished and was evicted after its retention period";
  return ServiceError(404, "session not found", std::move(detail));
}

}  // namespace

TrajectoryLog::TrajectoryLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open trajectory log " + path.string());
}

void TrajectoryLog::append(const Trajectory& t) {
  std::lock_guard lock(mu_);
  if (!out_.is_open()) return;
  out_ << dump_line(to_json(t)) << '\n';
  out_.flush();
}

SessionManager::SessionManager(std::vector<Problem> dataset, SessionDefaults defaults,
                               std::shared_ptr<TrajectoryLog> log, ClockFn clock)
    : defaults_(std::move(defaults)), log_(std::move(log)), clock_(std::move(clock)) {
  if (!clock_) clock_ = [] { return Clock::now(); };
  if (!log_) log_ = std::make_shared<TrajectoryLog>();
  std::vector<std::string> errors;
  for (auto e : validate_env_config(defaults_.env)) errors.push_back("env: " + e);
  for (auto e : validate_reward_config(defaults_.reward)) errors.push_back("reward: " + e);
  for (auto e : validate_judge_config(defaults_.judge)) errors.push_back("judge: " + e);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  for (auto& p : dataset) {
    std::string id = p.id;
    problems_.insert_or_assign(std::move(id), std::move(p));
  }
  id_salt_ = std::random_device{}();
  id_salt_ = (id_salt_ << 32) ^ std::random_device{}();
}

std::string SessionManager::new_id() {
  // Caller holds the unique lock.
  for (;;) {
    const std::uint64_t v = derive_seed(id_salt_, ++counter_);
    std::ostringstream os;
    os << "s-" << std::hex << std::setw(16) << std::setfill('0') << v;
    std::string id = os.str();
    if (!sessions_.contains(id) && !evicted_.contains(id)) return id;
  }
}

Json SessionManager::create(const Json& request) {
  evict_expired();
  if (!request.is_object()) throw ServiceError(400, "validation failed", Json{{"violations", {"body: expected an object"}}});

  Problem problem;
  const bool has_ref = request.contains("problem_ref");
  const bool has_inline = request.contains("problem");
  if (has_ref == has_inline) {
    throw ServiceError(400, "validation failed",
                       Json{{"violations", {"body: exactly one of problem_ref or problem is required"}}});
  }
  if (has_ref) {
    const Json& ref = request.at("problem_ref");
    if (!ref.is_string()) {
      throw ServiceError(400, "validation failed", Json{{"violations", {"problem_ref: expected a string"}}});
    }
    auto it = problems_.find(ref.get<std::string>());
    if (it == problems_.end()) throw ServiceError(404, "problem not found", Json{{"problem_ref", ref}});
    problem = it->second;
  } else {
    try {
      problem = problem_from_json(request.at("problem"));
    } catch (const ValidationError& e) {
      Json v = Json::array();
      for (const auto& s : e.violations()) v.push_back("problem." + s);
      throw ServiceError(400, "validation failed", Json{{"violations", v}});
    }
  }

  auto session = std::make_shared<Session>();
  session->env = defaults_.env;
  session->reward = defaults_.reward;
  session->judge = defaults_.judge;
  if (auto it = request.find("overrides"); it != request.end()) {
    auto errors = apply_episode_overrides(session->env, session->reward, session->judge, *it);
    if (!errors.empty()) throw ServiceError(400, "validation failed", Json{{"violations", errors}});
  }
  try {
    session->state = reset(problem, session->env);
  } catch (const ValidationError& e) {
    Json v = Json::array();
    for (const auto& s : e.violations()) v.push_back("problem: " + s);
    throw ServiceError(400, "validation failed", Json{{"violations", v}});
  }
  session->created_at = clock_();

  {
    std::unique_lock lock(mu_);
    session->id = new_id();
    sessions_.emplace(session->id, session);
  }

  Json messages = Json::array();
  for (const auto& m : session->state.history) messages.push_back(to_json(m));
  return Json{{"session_id", session->id},
              {"created_at", iso8601(session->created_at)},
              {"problem_id", problem.id},
              {"messages", std::move(messages)},
              {"turn", 0},
              {"max_turns", session->env.max_turns}};
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
  std::shared_lock lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  throw not_found_session(id, evicted_.contains(id));
}

Json SessionManager::step(const std::string& session_id, const std::string& assistant_text) {
  evict_expired();
  auto session = find(session_id);
  std::unique_lock lock(session->mu, std::try_to_lock);
  if (!lock.owns_lock()) {
    throw ServiceError(409, "session busy", Json{{"session_id", session_id}, {"reason", "concurrent step"}});
  }
  if (session->state.done) {
    throw ServiceError(409, "session done", Json{{"session_id", session_id}, {"reason", "episode finished"}});
  }

  Transition tr = gril::step(session->state, assistant_text, session->env, session->reward, session->judge);
  session->state = std::move(tr.state);
  const StepResult& r = tr.result;

  Json out{{"session_id", session_id},
           {"turn", session->state.turn},
           {"feedback", optional_message(r.feedback)},
           {"event", std::string(to_string(r.event))},
           {"action", std::string(to_string(r.action))},
           {"turn_reward", r.turn_reward},
           {"done", r.done},
           {"outcome", r.outcome_if_done ? Json(std::string(to_string(*r.outcome_if_done))) : Json(nullptr)},
           {"trajectory", nullptr}};
  if (r.done) {
    Trajectory t = finalize(session->state, session->reward);
    log_->append(t);
    session->finished_at = clock_();
    out["trajectory"] = to_json(t);
  }
  return out;
}

Trajectory SessionManager::trajectory(const std::string& session_id) {
  evict_expired();
  auto session = find(session_id);
  std::lock_guard lock(session->mu);
  return session->state.done ? finalize(session->state, session->reward) : snapshot(session->state);
}

Json SessionManager::problem(const std::string& problem_id) const {
  auto it = problems_.find(problem_id);
  if (it == problems_.end()) throw ServiceError(404, "problem not found", Json{{"problem_ref", problem_id}});
  return to_json(it->second);
}

void SessionManager::evict_expired() {
  const auto now = clock_();
  std::unique_lock lock(mu_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    const auto& s = *it->second;
    // finished_at is written under the session mutex; the trajectory was
    // already logged when it was set.
    std::unique_lock slock(it->second->mu, std::try_to_lock);
    if (slock.owns_lock() && s.finished_at && now - *s.finished_at >= defaults_.ttl) {
      evicted_.insert(it->first);
      slock.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

int SessionManager::drain() {
  std::unique_lock lock(mu_);
  int drained = 0;
  for (auto& [id, session] : sessions_) {
    std::lock_guard slock(session->mu);
    if (session->state.done) continue;
    Trajectory t = snapshot(session->state);
    t.interrupted = true;
    log_->append(t);
    session->state.done = true;
    ++drained;
  }
  sessions_.clear();
  return drained;
}

std::size_t SessionManager::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

namespace {

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(dump_line(body), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    reply(res, e.status(), e.body());
  } catch (const Json::exception& e) {
    reply(res, 400, Json{{"error", "malformed json"}, {"detail", Json{{"message", e.what()}}}});
  } catch (const ValidationError& e) {
    reply(res, 400, Json{{"error", "validation failed"}, {"detail", Json{{"violations", e.violations()}}}});
  } catch (const ContractError& e) {
    reply(res, 409, Json{{"error", "contract violation"}, {"detail", Json{{"message", e.what()}}}});
  } catch (const std::exception& e) {
    reply(res, 500, Json{{"error", "internal error"}, {"detail", Json{{"message", e.what()}}}});
  }
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  return Json::parse(req.body);
}

}  // namespace

HttpService::HttpService(SessionManager& sessions)
    : sessions_(sessions), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  // Sized for many concurrent sessions rather than for the core count.
  srv.new_task_queue = [] { return new httplib::ThreadPool(std::max(32u, 4 * std::thread::hardware_concurrency())); };
  srv.Get("/v1/healthz", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, Json{{"status", "ok"}, {"sessions", sessions_.size()}});
  });
  srv.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 201, sessions_.create(parse_body(req))); });
  });
  srv.Post(R"(/v1/sessions/([^/]+)/step)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = parse_body(req);
      auto it = body.find("assistant_text");
      if (it == body.end() || !it->is_string()) {
        throw ServiceError(400, "validation failed", Json{{"violations", {"assistant_text: expected a string"}}});
      }
      reply(res, 200, sessions_.step(req.matches[1], it->get<std::string>()));
    });
  });
  srv.Get(R"(/v1/sessions/([^/]+)/trajectory)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, to_json(sessions_.trajectory(req.matches[1]))); });
  });
  srv.Get(R"(/v1/problems/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, sessions_.problem(httplib::detail::decode_url(req.matches[1], false))); });
  });
}

HttpService::~HttpService() { stop(); }

bool HttpService::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpService::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpService::listen_after_bind() { return server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_) server_->stop();
}

void HttpService::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace gril

#include "gril/chat_client.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <regex>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "gril/errors.hpp"
#include "gril/rng.hpp"
#include "gril/serialize.hpp"

namespace gril {

std::vector<std::string> validate_endpoint(const RemoteEndpoint& ep) {
  std::vector<std::string> errors;
  try {
    parse_base_url(ep.base_url);
  } catch (const std::invalid_argument& e) {
    errors.emplace_back(std::string("base_url: ") + e.what());
  }
  if (ep.model_name.empty()) errors.emplace_back("model_name must be non-empty");
  if (!(ep.temperature >= 0.0)) errors.emplace_back("temperature must be non-negative");
  if (ep.max_new_tokens < 1) errors.emplace_back("max_new_tokens must be positive");
  if (ep.timeout.count() <= 0) errors.emplace_back("timeout must be positive");
  if (ep.max_retries < 0) errors.emplace_back("max_retries must be non-negative");
  if (!(ep.retry.factor >= 1.0)) errors.emplace_back("retry factor must be at least 1");
  if (!(ep.retry.jitter >= 0.0 && ep.retry.jitter < 1.0)) {
    errors.emplace_back("retry jitter must lie in [0,1)");
  }
  return errors;
}

ParsedUrl parse_base_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?)://([A-Za-z0-9.\-]+|\[[0-9A-Fa-f:]+\])(?::(\d{1,5}))?(/[^\s?#]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) throw std::invalid_argument("malformed URL '" + url + "'");
  ParsedUrl out;
  out.scheme = m[1];
  out.host = m[2];
  out.port = m[3].matched ? std::stoi(m[3]) : (out.scheme == "https" ? 443 : 80);
  if (out.port < 1 || out.port > 65535) throw std::invalid_argument("port out of range");
  out.path = m[4].matched ? std::string(m[4]) : "";
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  return out;
}

std::chrono::milliseconds backoff_delay(const RetryConfig& cfg, int attempt, double unit_draw) {
  double base = static_cast<double>(cfg.initial_delay.count()) * std::pow(cfg.factor, attempt);
  double scale = 1.0 + cfg.jitter * (2.0 * unit_draw - 1.0);
  return std::chrono::milliseconds(static_cast<long long>(std::llround(base * scale)));
}

ChatClient::ChatClient(RemoteEndpoint endpoint, Sleeper sleeper)
    : endpoint_(std::move(endpoint)), url_(parse_base_url(endpoint_.base_url)), sleeper_(std::move(sleeper)) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url_.scheme == "https") {
    throw std::invalid_argument("https endpoints need a build with OpenSSL support");
  }
#endif
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string ChatClient::complete(std::span<const Message> history, double temperature) const {
  Json body;
  body["model"] = endpoint_.model_name;
  Json messages = Json::array();
  for (const auto& m : history) {
    messages.push_back(Json{{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = temperature;
  body["max_tokens"] = endpoint_.max_new_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const std::string origin = url_.scheme + "://" + url_.host + ":" + std::to_string(url_.port);
  const std::string path = url_.path + "/chat/completions";
  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - timeout_s);

  thread_local Rng jitter_rng{std::random_device{}()};
  const int attempts_allowed = endpoint_.max_retries + 1;
  std::string last_error;
  for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
    if (attempt > 0) sleeper_(backoff_delay(endpoint_.retry, attempt - 1, jitter_rng.uniform_real()));

    httplib::Client client(origin);
    client.set_connection_timeout(timeout_s.count(), timeout_us.count());
    client.set_read_timeout(timeout_s.count(), timeout_us.count());
    client.set_write_timeout(timeout_s.count(), timeout_us.count());

    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status), attempt + 1);
    }
    try {
      Json reply = Json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed chat completion: ") + e.what(), attempt + 1);
    }
  }
  throw TransportError("chat request failed after " + std::to_string(attempts_allowed) +
                           " attempts (" + last_error + ")",
                       attempts_allowed);
}

}  // namespace gril

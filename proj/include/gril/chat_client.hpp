#pragma once

#include <chrono>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gril/core.hpp"

namespace gril {

/// Exponential backoff: initial_delay * factor^attempt, scaled by a
/// uniform jitter in [1 - jitter, 1 + jitter].
struct RetryConfig {
  std::chrono::milliseconds initial_delay{500};
  double factor = 2.0;
  double jitter = 0.2;
};

/// A chat-completions endpoint. base_url includes any path prefix, e.g.
/// "http://localhost:8000/v1"; requests go to base_url + "/chat/completions".
struct RemoteEndpoint {
  std::string base_url;
  std::string model_name;
  std::string api_key_env = "GRIL_API_KEY";
  double temperature = 1.0;
  int max_new_tokens = 1024;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  RetryConfig retry;
};

std::vector<std::string> validate_endpoint(const RemoteEndpoint& ep);

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path;  // without trailing slash
};

/// Throws std::invalid_argument on anything but http(s)://host[:port][/path].
ParsedUrl parse_base_url(const std::string& url);

/// Delay before retry number `attempt` (0-based), given a uniform draw in [0,1).
std::chrono::milliseconds backoff_delay(const RetryConfig& cfg, int attempt, double unit_draw);

/// Minimal chat-completions client. The API key is read from the named
/// environment variable at call time and never logged.
class ChatClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit ChatClient(RemoteEndpoint endpoint, Sleeper sleeper = {});

  /// Sends the history and returns the first choice's content verbatim.
  /// Retries transport failures, 429 and 5xx; throws TransportError after
  /// max_retries + 1 attempts, or immediately on other 4xx.
  std::string complete(std::span<const Message> history, double temperature) const;
  std::string complete(std::span<const Message> history) const {
    return complete(history, endpoint_.temperature);
  }

  const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  RemoteEndpoint endpoint_;
  ParsedUrl url_;
  Sleeper sleeper_;
};

}  // namespace gril

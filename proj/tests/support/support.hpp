#pragma once

#include <atomic>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "gril/core.hpp"
#include "gril/parser.hpp"
#include "gril/policy.hpp"
#include "gril/rng.hpp"
#include "gril/serialize.hpp"

namespace gril::testing {

inline std::string fixture_path(const std::string& name) { return std::string(GRIL_FIXTURE_DIR) + "/" + name; }

inline Json load_json_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  return Json::parse(in);
}

inline std::string reminder_line() {
  return "Always output: <think> [Your thoughts] </think> <answer> [your answer] </answer> with no extra "
         "text. Strictly follow this format.";
}

inline Problem incomplete_problem(std::string id = "inc", std::string gold = "3") {
  return Problem{std::move(id), ProblemKind::Incomplete, "Find the sum of the remainders.",
                 std::string("When an integer is divided by 15, the remainder is 7."), std::move(gold), std::nullopt};
}

inline Problem complete_problem(std::string id = "comp", std::string gold = "12") {
  return Problem{std::move(id), ProblemKind::Complete, "Tom has 5 apples and buys 7 more. How many now?",
                 std::nullopt, std::move(gold), std::nullopt};
}

inline std::string answer_text(const std::string& answer, const std::string& think = "reasoning") {
  return "<think>" + think + "</think><answer>" + answer + "</answer>";
}

inline std::string clarify_text() { return answer_text("Insufficient information"); }

// ---- random generators ------------------------------------------------------

inline std::string random_word(Rng& rng) {
  static const char* words[] = {"the", "apples", "cost", "Tom", "has", "bundles", "sheets", "of", "paper",
                                "and", "each", "jar", "holds", "x", "cookies", "total", "we", "need"};
  return words[rng.uniform_index(std::size(words))];
}

inline std::string random_words(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += random_word(rng);
  }
  return s;
}

inline Problem random_problem(Rng& rng, int index) {
  Problem p;
  p.id = "p" + std::to_string(index);
  p.question = "Tom has " + std::to_string(rng.uniform_index(50)) + " " + random_words(rng, 3) + ". How many?";
  p.gold_answer = std::to_string(rng.uniform_index(20));
  if (rng.uniform_index(2) == 0) {
    p.kind = ProblemKind::Incomplete;
    p.missing_premise = "There are " + std::to_string(rng.uniform_index(9) + 1) + " " + random_words(rng, 2) + ".";
  } else {
    p.kind = ProblemKind::Complete;
  }
  if (rng.uniform_index(3) == 0) p.source = "gen";
  return p;
}

/// Assistant text drawn from every parser branch: clarify variants, correct
/// and wrong solves (plain and boxed), malformed, duplicated tags, junk.
inline std::string random_assistant_text(Rng& rng, const std::string& gold) {
  switch (rng.uniform_index(10)) {
    case 0: return clarify_text();
    case 1: return answer_text("insufficient   INFORMATION here", random_words(rng, 4));
    case 2: return answer_text(gold);
    case 3: return answer_text("\\(\\boxed{" + gold + "}\\)");
    case 4: return answer_text(std::to_string(rng.uniform_index(30) + 100));
    case 5: return "<think>" + random_words(rng, 3) + "</think>";
    case 6: return answer_text(gold) + answer_text("999");
    case 7: return "  " + answer_text(" " + gold + " ") + " trailing";
    case 8: return random_words(rng, 5);
    default: return answer_text("");
  }
}

// ---- mock chat-completions server ------------------------------------------

/// Local HTTP server on an ephemeral port. The handler receives the parsed
/// request body and fills the response.
class MockChatServer {
 public:
  using Handler = std::function<void(const Json& request, httplib::Response& res)>;

  explicit MockChatServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post(R"(.*/chat/completions)", [this](const httplib::Request& req, httplib::Response& res) {
      Json body = Json::parse(req.body);
      {
        std::lock_guard lock(mu_);
        requests_.push_back(body);
        auth_.push_back(req.get_header_value("Authorization"));
        paths_.push_back(req.path);
      }
      handler_(body, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockChatServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url(const std::string& prefix = "/v1") const {
    return "http://127.0.0.1:" + std::to_string(port_) + prefix;
  }

  std::vector<Json> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::vector<std::string> auth_headers() const {
    std::lock_guard lock(mu_);
    return auth_;
  }
  std::vector<std::string> paths() const {
    std::lock_guard lock(mu_);
    return paths_;
  }

  static void reply_content(httplib::Response& res, const std::string& content) {
    Json body{{"id", "cmpl-1"},
              {"choices", Json::array({Json{{"index", 0}, {"message", Json{{"role", "assistant"}, {"content", content}}}}})}};
    res.set_content(body.dump(), "application/json");
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<Json> requests_;
  std::vector<std::string> auth_;
  std::vector<std::string> paths_;
};

}  // namespace gril::testing

#include <doctest.h>

#include <algorithm>

#include "gril/errors.hpp"
#include "gril/settings.hpp"
#include "support.hpp"

using namespace gril;
using namespace gril::testing;

namespace {

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("defaults are the training setting") {
  Settings s;
  CHECK(s.env.max_turns == 4);
  CHECK(s.reward.alpha == 0.3);
  CHECK(s.reward.beta == 0.7);
  CHECK(s.reward.gamma_d == 0.5);
  CHECK(s.reward.lambda == 2.0);
  CHECK(s.dataset.fraction == 0.5);
  CHECK(validate_settings(s).empty());
  CHECK(load_settings("").env.max_turns == 4);
}

TEST_CASE("TOML file overrides defaults") {
  const Settings s = load_settings(fixture_path("config.toml"));
  CHECK(s.seed == 42);
  CHECK(s.jobs == 2);
  CHECK(s.env.max_turns == 6);
  CHECK(s.env.condition == FeedbackCondition::Noisy);
  CHECK(s.env.noise_sentences == 3);
  CHECK(s.env.feedback_template(template_key::kNegative) == "Nope.");
  CHECK(s.env.feedback_template(template_key::kReminder) == reminder_line());
  CHECK(s.reward.alpha == 0.4);
  CHECK(s.reward.lambda == 2.0);
  CHECK(s.judge.numeric_tolerance == 1e-4);
  CHECK(s.endpoint.model_name == "local-model");
  CHECK(s.endpoint.temperature == 0.6);
  CHECK(s.dataset.fraction == 0.4);
  CHECK(s.dataset.oracle == "permissive");
  CHECK(s.service.addr == "0.0.0.0:9000");
  CHECK(s.service.ttl.count() == 60);
}

TEST_CASE("unknown keys and wrong types are reported with their paths") {
  Settings s;
  const Json j = parse_toml(R"(
typo = 1
[env]
max_turns = "four"
colour = "red"
[reward]
alpha = true
[env.templates]
bogus = "x"
)");
  const auto errors = apply_settings_json(s, j);
  CHECK(mentions(errors, "typo: unknown key"));
  CHECK(mentions(errors, "env.max_turns: expected an integer"));
  CHECK(mentions(errors, "env.colour: unknown key"));
  CHECK(mentions(errors, "reward.alpha: expected a number"));
  CHECK(mentions(errors, "env.templates.bogus: unknown template"));
  CHECK(errors.size() == 5);
}

TEST_CASE("semantic validation after merging") {
  Settings s;
  CHECK(apply_settings_json(s, parse_toml("[reward]\ngamma_d = 1.5\n[dataset]\nfraction = 2.0\noracle = \"oracle9\"\n")).empty());
  const auto errors = validate_settings(s);
  CHECK(mentions(errors, "reward: "));
  CHECK(mentions(errors, "dataset.fraction"));
  CHECK(mentions(errors, "dataset.oracle"));
}

TEST_CASE("syntax errors and missing files") {
  CHECK_THROWS_AS(parse_toml("[env\nmax_turns = 3"), ValidationError);
  CHECK_THROWS_AS(load_settings("/nonexistent/config.toml"), std::runtime_error);
  try {
    parse_toml("a = ");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].find("line 1") != std::string::npos);
  }
}

TEST_CASE("episode overrides") {
  EnvConfig env;
  RewardConfig reward;
  JudgeConfig judge;
  CHECK(apply_episode_overrides(env, reward, judge, Json{{"env", {{"max_turns", 2}}}, {"reward", {{"lambda", 1.0}}}})
            .empty());
  CHECK(env.max_turns == 2);
  CHECK(reward.lambda == 1.0);

  EnvConfig env2;
  auto errors = apply_episode_overrides(env2, reward, judge, Json{{"env", {{"max_turns", 0}}}});
  CHECK(mentions(errors, "env: "));
  errors = apply_episode_overrides(env2, reward, judge, Json{{"service", Json::object()}});
  CHECK(mentions(errors, "overrides.service: unknown key"));
  errors = apply_episode_overrides(env2, reward, judge, Json::array());
  CHECK(mentions(errors, "overrides: expected a table"));
}

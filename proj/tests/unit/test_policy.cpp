#include <doctest.h>

#include <sstream>

#include "gril/errors.hpp"
#include "gril/policy.hpp"
#include "support.hpp"

using namespace gril;
using namespace gril::testing;

namespace {

std::vector<Message> history_with(int assistant_turns) {
  std::vector<Message> h{{Role::System, "sys"}, {Role::User, "q"}};
  for (int i = 0; i < assistant_turns; ++i) {
    h.push_back({Role::Assistant, "a"});
    h.push_back({Role::User, "f"});
  }
  return h;
}

Problem fixture_problem(const Json& fx, const std::string& id) {
  for (const auto& p : fx["problems"]) {
    if (p["id"] == id) return problem_from_json(p);
  }
  throw std::runtime_error("missing fixture problem " + id);
}

}  // namespace

TEST_CASE("fixed policies") {
  const auto h = history_with(0);
  CHECK(next_response(PolicySpec{PolicyKind::AlwaysClarify, {}, {}}, h) == kAlwaysClarifyText);
  CHECK(next_response(PolicySpec{PolicyKind::AlwaysSolve, {}, {}}, h) == kAlwaysSolveText);
  auto clarify = parse_response(std::string(kAlwaysClarifyText), true);
  CHECK(classify_action(clarify) == ActionKind::Clarify);
  auto solve = parse_response(std::string(kAlwaysSolveText), true);
  CHECK(classify_action(solve) == ActionKind::Solve);
  CHECK(extract_final_answer(solve) == "-1");
}

TEST_CASE("scripted policy indexes by assistant turns") {
  PolicySpec spec{PolicyKind::Scripted, {"one", "two"}, {}};
  CHECK(next_response(spec, history_with(0)) == "one");
  CHECK(next_response(spec, history_with(1)) == "two");
  CHECK_THROWS_AS(next_response(spec, history_with(2)), ScriptExhaustedError);
}

TEST_CASE("policy spec validation and history contracts") {
  CHECK_THROWS_AS(make_policy(PolicySpec{PolicyKind::Scripted, {}, {}}), ValidationError);
  CHECK_THROWS_AS(make_policy(PolicySpec{PolicyKind::Remote, {}, {}}), ValidationError);
  auto p = make_policy(PolicySpec{PolicyKind::AlwaysClarify, {}, {}});
  std::vector<Message> empty;
  CHECK_THROWS_AS(p->next_response(empty), ContractError);
  auto h = history_with(0);
  h.push_back({Role::Assistant, "x"});
  CHECK_THROWS_AS(p->next_response(h), ContractError);
}

TEST_CASE("remote policy goes through the chat client") {
  MockChatServer server([](const Json& req, httplib::Response& res) {
    MockChatServer::reply_content(res, "echo:" + req["messages"].back()["content"].get<std::string>());
  });
  RemoteEndpoint ep;
  ep.base_url = server.base_url();
  ep.model_name = "m";
  PolicySpec spec{PolicyKind::Remote, {}, ep};
  CHECK(next_response(spec, history_with(0)) == "echo:q");
}

TEST_CASE("always-solve rollout on an Incomplete problem") {
  Trajectory t = rollout(PolicySpec{PolicyKind::AlwaysSolve, {}, {}}, incomplete_problem(), {}, {}, {});
  REQUIRE(t.turns.size() == 4);
  for (const auto& r : t.turns) {
    CHECK(r.event == TurnEvent::NegativeFeedback);
    CHECK(r.turn_reward == 0.0);
  }
  CHECK(t.outcome == Outcome::ExhaustedTurns);
  CHECK(t.reward->total == 0.0);
  CHECK_FALSE(t.detected);
}

TEST_CASE("always-clarify rollout on a Complete problem is penalized once") {
  Trajectory t = rollout(PolicySpec{PolicyKind::AlwaysClarify, {}, {}}, complete_problem(), {}, {}, {});
  CHECK(t.turns.size() == 4);
  CHECK(t.unnecessary_clarifications == 4);
  CHECK(t.reward->total == -2.0);
}

TEST_CASE("scripted rollouts reproduce the case-study totals") {
  const Json fx = load_json_fixture("case_studies.json");
  for (const auto& ep : fx["episodes"]) {
    CAPTURE(ep["name"].get<std::string>());
    PolicySpec spec{PolicyKind::Scripted, {}, {}};
    for (const auto& turn : ep["turns"]) spec.script.push_back(turn["assistant"]);
    Trajectory t = rollout(spec, fixture_problem(fx, ep["problem_id"]), {}, {}, {});
    CHECK(to_string(*t.outcome) == ep["outcome"].get<std::string>());
    CHECK(t.reward->total == doctest::Approx(ep["total"].get<double>()).epsilon(1e-12));
    CHECK(t.turns.size() == ep["turns"].size());
  }
}

TEST_CASE("policy failure surfaces the partial trajectory") {
  PolicySpec spec{PolicyKind::Scripted, {clarify_text()}, {}};
  try {
    rollout(spec, incomplete_problem(), {}, {}, {});
    FAIL("expected RolloutError");
  } catch (const RolloutError& e) {
    const Trajectory& p = e.partial();
    CHECK(p.turns.size() == 1);
    CHECK(p.detected);
    CHECK_FALSE(p.outcome.has_value());
    CHECK_FALSE(p.reward.has_value());
  }
}

TEST_CASE("human policy reads until a blank line") {
  std::istringstream in("<think>a</think>\n<answer>3</answer>\n\nsecond\n");
  std::ostringstream out;
  HumanPolicy human(in, out);
  CHECK(human.next_response(history_with(0)) == "<think>a</think>\n<answer>3</answer>");
  CHECK(out.str().find("q") != std::string::npos);
  CHECK(human.next_response(history_with(1)) == "second");
  CHECK_THROWS(human.next_response(history_with(2)));
}

TEST_CASE("function policy sees the live history") {
  std::vector<std::size_t> sizes;
  FunctionPolicy fp([&](std::span<const Message> h) {
    sizes.push_back(h.size());
    return std::string(kAlwaysSolveText);
  });
  rollout(fp, incomplete_problem(), {}, {}, {});
  CHECK(sizes == std::vector<std::size_t>{2, 4, 6, 8});
}

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gril/env.hpp"
#include "gril/reward.hpp"
#include "gril/serialize.hpp"
#include "support.hpp"

namespace gril::testing {

struct EnvCase {
  Problem problem;
  EnvConfig env;
  RewardConfig reward;
  std::vector<std::string> texts;  // enough to exhaust max_turns
};

inline EnvCase random_env_case(Rng& rng, int index) {
  EnvCase c;
  c.problem = random_problem(rng, index);
  c.env.max_turns = 1 + static_cast<int>(rng.uniform_index(6));
  c.env.strict_format = rng.uniform_index(4) == 0;
  c.env.condition = static_cast<FeedbackCondition>(rng.uniform_index(4));
  c.env.condition_seed = rng.next();
  c.reward.gamma_d = 0.1 + 0.8 * rng.uniform_real();
  c.reward.lambda = 3.0 * rng.uniform_real();
  for (int i = 0; i < c.env.max_turns; ++i) c.texts.push_back(random_assistant_text(rng, c.problem.gold_answer));
  return c;
}

struct EnvRun {
  std::vector<SessionState> states;  // after reset, then after each step
  std::vector<StepResult> results;
  Trajectory trajectory;
};

inline EnvRun run_env_case(const EnvCase& c) {
  EnvRun r;
  SessionState s = reset(c.problem, c.env);
  r.states.push_back(s);
  for (const auto& text : c.texts) {
    if (s.done) break;
    Transition t = step(s, text, c.env, c.reward, {});
    s = t.state;
    r.states.push_back(s);
    r.results.push_back(t.result);
  }
  r.trajectory = finalize(s, c.reward);
  return r;
}

/// Every environment invariant, checked on one generated case. Returns the
/// violated ones.
inline std::vector<std::string> check_env_invariants(const EnvCase& c) {
  std::vector<std::string> bad;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) bad.push_back(c.problem.id + ": " + what);
  };

  const EnvRun a = run_env_case(c);
  const EnvRun b = run_env_case(c);
  expect(dump_line(to_json(a.trajectory)) == dump_line(to_json(b.trajectory)), "determinism (trajectory)");
  expect(a.states.back().history == b.states.back().history, "determinism (history)");

  const Trajectory& t = a.trajectory;
  const bool incomplete = c.problem.kind == ProblemKind::Incomplete;
  const bool forced = c.env.condition == FeedbackCondition::ForcedFeedback;

  expect(static_cast<int>(t.turns.size()) <= c.env.max_turns, "turn bound");
  expect(t.outcome.has_value() && t.reward.has_value(), "finalized");

  int injections = 0;
  for (const auto& rec : t.turns) {
    if (rec.event == TurnEvent::PremiseProvided || rec.event == TurnEvent::ForcedPremise) ++injections;
    if (rec.event == TurnEvent::PremiseProvided) {
      expect(incomplete && rec.action == ActionKind::Clarify, "injection only via Clarify on Incomplete");
    }
    if (rec.event == TurnEvent::ForcedPremise) {
      expect(forced && incomplete && rec.turn == 1 && rec.action != ActionKind::Clarify, "forced injection scope");
    }
    if (rec.event == TurnEvent::Terminal) expect(rec.action == ActionKind::Solve, "terminal only via Solve");
    if (rec.action == ActionKind::Clarify) expect(rec.event != TurnEvent::Terminal, "Clarify never terminates");
    const bool last = &rec == &t.turns.back();
    expect(rec.feedback.has_value() != last, "feedback on every turn but the last");
  }
  expect(injections <= 1, "single injection");

  const bool solved = t.outcome == Outcome::SolvedCorrect;
  expect(solved == (!t.turns.empty() && t.turns.back().event == TurnEvent::Terminal), "success only via correct Solve");
  if (t.outcome == Outcome::GracefulStop) {
    expect(c.env.condition == FeedbackCondition::Uninformative && incomplete, "graceful stop scope");
  }
  expect(t.detected == t.detection_turn.has_value(), "detection_turn iff detected");
  if (!incomplete) expect(!t.detected, "Complete problems are never detected");

  for (const auto& s : a.states) {
    if (!s.done) expect(s.turn < c.env.max_turns, "live state below turn bound");
    if (s.premise_provided) expect(incomplete && (s.detected || forced), "premise only on Incomplete");
    // History: system, user prompt, then assistant/user alternation.
    for (std::size_t i = 2; i < s.history.size(); ++i) {
      const Role want = (i % 2 == 0) ? Role::Assistant : Role::User;
      expect(s.history[i].role == want, "history alternates");
    }
  }

  // Decomposition identity.
  const RewardBreakdown& rb = *t.reward;
  expect(combine_total(c.problem.kind, rb, c.reward) == rb.total, "reward decomposition");
  // Closed-form recomputation, independent of the reward module.
  const RewardConfig& rc = c.reward;
  const int n_prior = t.detection_turn ? *t.detection_turn - 1 : 0;
  const double detect = t.detected ? rc.r_base * std::pow(rc.gamma_d, n_prior) : 0.0;
  const double expected = incomplete
                              ? rc.alpha * detect + rc.beta * (solved ? rc.r_correct : 0.0)
                              : (solved ? rc.r_correct : 0.0) - (t.unnecessary_clarifications > 0 ? rc.lambda : 0.0);
  expect(std::abs(expected - rb.total) < 1e-12, "reward closed form");
  for (const auto& rec : t.turns) {
    if (t.detection_turn && rec.turn == *t.detection_turn) {
      expect(std::abs(rec.turn_reward - detect) < 1e-12, "detection turn reward");
    } else if (rec.event == TurnEvent::Terminal) {
      expect(rec.turn_reward == rc.r_correct, "terminal turn reward");
    } else {
      expect(rec.turn_reward == 0.0, "zero reward on other turns");
    }
  }
  return bad;
}

}  // namespace gril::testing

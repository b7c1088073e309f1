#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gril/core.hpp"
#include "gril/judge.hpp"

namespace gril {

/// The environment's state: the full dialogue history plus lifecycle flags.
struct SessionState {
  Problem problem;
  FeedbackCondition condition = FeedbackCondition::Standard;
  std::vector<Message> history;
  int turn = 0;  // completed assistant steps
  bool premise_provided = false;
  bool detected = false;
  std::optional<int> detection_turn;
  int unnecessary_clarifications = 0;
  bool done = false;
  std::optional<Outcome> outcome;
  std::vector<TurnRecord> records;

  bool operator==(const SessionState&) const = default;
};

struct StepResult {
  std::optional<Message> feedback;
  TurnEvent event = TurnEvent::FormatError;
  ActionKind action = ActionKind::Malformed;
  double turn_reward = 0.0;
  bool done = false;
  std::optional<Outcome> outcome_if_done;
};

struct Transition {
  SessionState state;
  StepResult result;
};

/// Fresh session: system message plus the rendered user prompt. The missing
/// premise is withheld. Throws ValidationError on an invalid problem or config.
SessionState reset(const Problem& problem, const EnvConfig& env_cfg);

/// Apply one assistant message. Throws ContractError if the session is done.
Transition step(SessionState state, std::string_view assistant_text, const EnvConfig& env_cfg,
                const RewardConfig& reward_cfg, const JudgeConfig& judge_cfg);

/// Assemble the finished trajectory and its reward. Throws ContractError on a live session.
Trajectory finalize(const SessionState& state, const RewardConfig& reward_cfg);

/// Partial trajectory of a live (or abandoned) session: no outcome, no reward.
Trajectory snapshot(const SessionState& state);

/// Convenience owner of one session and its configs.
class Episode {
 public:
  Episode(Problem problem, EnvConfig env_cfg = {}, RewardConfig reward_cfg = {},
          JudgeConfig judge_cfg = {});

  const StepResult& step(std::string_view assistant_text);
  Trajectory finalize() const { return gril::finalize(state_, reward_cfg_); }
  Trajectory snapshot() const { return gril::snapshot(state_); }

  const SessionState& state() const noexcept { return state_; }
  const std::vector<Message>& history() const noexcept { return state_.history; }
  bool done() const noexcept { return state_.done; }
  const EnvConfig& env_config() const noexcept { return env_cfg_; }
  const RewardConfig& reward_config() const noexcept { return reward_cfg_; }

 private:
  EnvConfig env_cfg_;
  RewardConfig reward_cfg_;
  JudgeConfig judge_cfg_;
  SessionState state_;
  StepResult last_;
};

}  // namespace gril

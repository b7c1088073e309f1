#include "gril/env.hpp"

#include "gril/errors.hpp"
#include "gril/parser.hpp"
#include "gril/reward.hpp"
#include "gril/rng.hpp"
#include "gril/robustness.hpp"
#include "gril/text.hpp"

namespace gril {

namespace {

std::string render_template(std::string_view tmpl, const std::string& question,
                            const std::string& premise, const std::string& reminder) {
  return text::render(tmpl, [&](std::string_view key) -> const std::string* {
    if (key == "question") return &question;
    if (key == "premise") return &premise;
    if (key == "reminder") return &reminder;
    return nullptr;
  });
}

std::uint64_t feedback_seed(const EnvConfig& cfg, const SessionState& s, int turn) {
  return derive_seed(cfg.condition_seed, stable_hash(s.problem.id) + static_cast<std::uint64_t>(turn));
}

struct Reaction {
  TurnEvent event;
  std::optional<std::string> body;  // feedback text before the reminder line
  double reward = 0.0;
};

}  // namespace

SessionState reset(const Problem& problem, const EnvConfig& env_cfg) {
  auto errors = validate_problem(problem);
  auto cfg_errors = validate_env_config(env_cfg);
  errors.insert(errors.end(), cfg_errors.begin(), cfg_errors.end());
  if (!errors.empty()) throw ValidationError(std::move(errors));

  SessionState s;
  s.problem = problem;
  s.condition = env_cfg.condition;
  const std::string& reminder = env_cfg.feedback_template(template_key::kReminder);
  s.history.push_back({Role::System, env_cfg.feedback_template(template_key::kSystem), 0});
  s.history.push_back(
      {Role::User, render_template(env_cfg.prompt_template, problem.question, "", reminder), 0});
  return s;
}

Transition step(SessionState state, std::string_view assistant_text, const EnvConfig& env_cfg,
                const RewardConfig& reward_cfg, const JudgeConfig& judge_cfg) {
  if (state.done) throw ContractError("step called on a finished session");

  const int turn = state.turn + 1;
  const Problem& problem = state.problem;
  const std::string premise = problem.missing_premise.value_or("");
  const bool incomplete = problem.kind == ProblemKind::Incomplete;
  const bool pre_injection = incomplete && !state.premise_provided;

  Message assistant{Role::Assistant, std::string(assistant_text), turn};
  state.history.push_back(assistant);

  ParsedResponse parsed = parse_response(assistant_text, env_cfg.strict_format);
  ActionKind action = classify_action(parsed);
  std::vector<std::string> audit = audit_flags(parsed, action);

  auto tmpl = [&](std::string_view key) {
    return render_template(env_cfg.feedback_template(key), problem.question, premise, "");
  };

  const bool forced_now = pre_injection && turn == 1 &&
                          state.condition == FeedbackCondition::ForcedFeedback &&
                          action != ActionKind::Clarify;

  Reaction r{TurnEvent::FormatError, std::nullopt, 0.0};
  if (forced_now) {
    r = {TurnEvent::ForcedPremise, tmpl(template_key::kForcedPremise), 0.0};
    state.premise_provided = true;
  } else if (action == ActionKind::Malformed) {
    r = {TurnEvent::FormatError, tmpl(template_key::kFormatError), 0.0};
  } else if (action == ActionKind::Clarify) {
    if (pre_injection && state.condition == FeedbackCondition::Uninformative) {
      r = {TurnEvent::EvasiveReply,
           uninformative_response(feedback_seed(env_cfg, state, turn), env_cfg.evasive_pool), 0.0};
      if (!state.detected) {
        r.reward = detect_reward(turn - 1, reward_cfg);
        state.detected = true;
        state.detection_turn = turn;
      }
    } else if (pre_injection) {
      std::string body = tmpl(template_key::kDetection);
      if (state.condition == FeedbackCondition::Noisy) {
        body = inject_noise(body, env_cfg.distractors, feedback_seed(env_cfg, state, turn),
                            env_cfg.noise_sentences);
      }
      r = {TurnEvent::PremiseProvided, std::move(body), detect_reward(turn - 1, reward_cfg)};
      state.detected = true;
      state.detection_turn = turn;
      state.premise_provided = true;
    } else {
      r = {TurnEvent::UnnecessaryClarification, tmpl(template_key::kUnnecessary), 0.0};
      if (incomplete) {
        audit.emplace_back(audit::kClarifyAfterPremise);
      } else {
        ++state.unnecessary_clarifications;
      }
    }
  } else if (pre_injection) {
    r = {TurnEvent::NegativeFeedback, tmpl(template_key::kNegative), 0.0};
  } else if (check_answer(extract_final_answer(parsed), problem.gold_answer, judge_cfg)) {
    r = {TurnEvent::Terminal, std::nullopt, solve_reward(true, reward_cfg)};
    state.done = true;
    state.outcome = Outcome::SolvedCorrect;
  } else {
    r = {TurnEvent::NegativeFeedback, tmpl(template_key::kNegative), 0.0};
  }

  state.turn = turn;
  if (!state.done && state.turn >= env_cfg.max_turns) {
    state.done = true;
    const bool graceful = state.condition == FeedbackCondition::Uninformative && incomplete &&
                          !state.premise_provided && action == ActionKind::Clarify;
    state.outcome = graceful ? Outcome::GracefulStop : Outcome::ExhaustedTurns;
    r.body.reset();  // no further turn to deliver feedback to
  }

  std::optional<Message> feedback;
  if (r.body) {
    feedback = Message{Role::User, *r.body + "\n" + env_cfg.feedback_template(template_key::kReminder),
                       turn};
    state.history.push_back(*feedback);
  }

  state.records.push_back(
      TurnRecord{turn, std::move(assistant), action, feedback, r.reward, r.event, std::move(audit)});

  StepResult result{feedback, r.event, action, r.reward, state.done, state.outcome};
  return {std::move(state), std::move(result)};
}

Trajectory snapshot(const SessionState& state) {
  Trajectory t;
  t.problem_id = state.problem.id;
  t.kind = state.problem.kind;
  t.condition = state.condition;
  t.turns = state.records;
  t.detected = state.detected;
  t.detection_turn = state.detection_turn;
  t.unnecessary_clarifications = state.unnecessary_clarifications;
  return t;
}

Trajectory finalize(const SessionState& state, const RewardConfig& reward_cfg) {
  if (!state.done) throw ContractError("finalize called on a live session");
  Trajectory t = snapshot(state);
  t.outcome = state.outcome;
  const bool correct = state.outcome == Outcome::SolvedCorrect;
  const bool complete = state.problem.kind == ProblemKind::Complete;
  t.reward = trajectory_reward(state.problem.kind, state.detected,
                               state.detection_turn ? *state.detection_turn - 1 : 0, correct,
                               complete && state.unnecessary_clarifications > 0, reward_cfg);
  return t;
}

Episode::Episode(Problem problem, EnvConfig env_cfg, RewardConfig reward_cfg, JudgeConfig judge_cfg)
    : env_cfg_(std::move(env_cfg)),
      reward_cfg_(reward_cfg),
      judge_cfg_(judge_cfg),
      state_(reset(problem, env_cfg_)) {}

const StepResult& Episode::step(std::string_view assistant_text) {
  auto [next, result] = gril::step(state_, assistant_text, env_cfg_, reward_cfg_, judge_cfg_);
  state_ = std::move(next);
  last_ = std::move(result);
  return last_;
}

}  // namespace gril

#include "gril/core.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "gril/text.hpp"

namespace gril {

namespace {

constexpr std::string_view kReminderLine =
    "Always output: <think> [Your thoughts] </think> <answer> [your answer] </answer> with no "
    "extra text. Strictly follow this format.";

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  throw std::logic_error("unnamed enum value");
}

constexpr std::array<std::pair<ProblemKind, std::string_view>, 2> kKinds{{
    {ProblemKind::Incomplete, "Incomplete"},
    {ProblemKind::Complete, "Complete"},
}};
constexpr std::array<std::pair<Role, std::string_view>, 3> kRoles{{
    {Role::System, "system"},
    {Role::User, "user"},
    {Role::Assistant, "assistant"},
}};
constexpr std::array<std::pair<ActionKind, std::string_view>, 3> kActions{{
    {ActionKind::Solve, "Solve"},
    {ActionKind::Clarify, "Clarify"},
    {ActionKind::Malformed, "Malformed"},
}};
constexpr std::array<std::pair<FeedbackCondition, std::string_view>, 4> kConditions{{
    {FeedbackCondition::Standard, "standard"},
    {FeedbackCondition::ForcedFeedback, "forced-feedback"},
    {FeedbackCondition::Noisy, "noisy"},
    {FeedbackCondition::Uninformative, "uninformative"},
}};
constexpr std::array<std::pair<Outcome, std::string_view>, 4> kOutcomes{{
    {Outcome::SolvedCorrect, "SolvedCorrect"},
    {Outcome::SolvedWrong, "SolvedWrong"},
    {Outcome::ExhaustedTurns, "ExhaustedTurns"},
    {Outcome::GracefulStop, "GracefulStop"},
}};
constexpr std::array<std::pair<TurnEvent, std::string_view>, 7> kEvents{{
    {TurnEvent::PremiseProvided, "PremiseProvided"},
    {TurnEvent::NegativeFeedback, "NegativeFeedback"},
    {TurnEvent::UnnecessaryClarification, "UnnecessaryClarification"},
    {TurnEvent::FormatError, "FormatError"},
    {TurnEvent::Terminal, "Terminal"},
    {TurnEvent::ForcedPremise, "ForcedPremise"},
    {TurnEvent::EvasiveReply, "EvasiveReply"},
}};

}  // namespace

std::vector<std::string> validate_problem(const Problem& p) {
  std::vector<std::string> errors;
  if (text::trim(p.question).empty()) errors.emplace_back("question must be non-empty");
  if (text::trim(p.gold_answer).empty()) errors.emplace_back("gold_answer must be non-empty");
  if (p.kind == ProblemKind::Incomplete &&
      (!p.missing_premise || text::trim(*p.missing_premise).empty())) {
    errors.emplace_back("missing_premise must be non-empty for Incomplete problems");
  }
  if (p.kind == ProblemKind::Complete && p.missing_premise) {
    errors.emplace_back("missing_premise must be absent for Complete problems");
  }
  return errors;
}

const std::vector<std::string_view>& required_template_keys() {
  static const std::vector<std::string_view> keys{
      template_key::kSystem,      template_key::kDetection,   template_key::kForcedPremise,
      template_key::kNegative,    template_key::kUnnecessary, template_key::kFormatError,
      template_key::kReminder,
  };
  return keys;
}

std::map<std::string, std::string, std::less<>> default_feedback_templates() {
  return {
      {std::string(template_key::kSystem), "You are a helpful assistant."},
      // Verbatim from the published transcripts, typos included.
      {std::string(template_key::kDetection),
       "Successfully detected a missing premise. Here is the missed information: {premise}. "
       "Please solve the problem now.You should give detailed reasonig steps"},
      {std::string(template_key::kForcedPremise),
       "Here is the missed information: {premise}. Please solve the problem now.You should give "
       "detailed reasonig steps"},
      {std::string(template_key::kNegative), "That is incorrect. Please try again."},
      {std::string(template_key::kUnnecessary),
       "No additional information is needed. Please solve the problem."},
      {std::string(template_key::kFormatError),
       "Your response did not follow the required format. Please answer again."},
      {std::string(template_key::kReminder), std::string(kReminderLine)},
  };
}

std::string default_prompt_template() {
  return "Please solve the following problem, strictly adhering to this format:\n"
         "\n"
         "1.  **<think>...</think>**: Must contain the complete, step-by-step reasoning process. "
         "If information is missing, state why here and terminate your thinking process.\n"
         "\n"
         "2.  **<answer>...</answer>**: Must ONLY contain the final answer enclosed in "
         "`\\boxed{}`. If information is insufficient, the answer must be 'insufficient "
         "information'.\n"
         "\n"
         "Turn 1:\n"
         "State:\n"
         "{question}\n"
         "{reminder}";
}

std::vector<std::string> default_distractors() {
  return {
      "By the way, the weather has been lovely this week.",
      "My neighbor just adopted a new puppy.",
      "I had pasta for lunch today.",
      "Did you watch the game last night?",
      "The coffee shop down the street is closed on Mondays.",
      "I still need to water the plants later.",
      "Traffic was terrible this morning.",
      "My cousin is visiting next weekend.",
  };
}

std::vector<std::string> default_evasive_pool() {
  return {
      "I don't know",
      "Don't ask me.",
      "I'm not sure about that.",
      "No idea, sorry.",
      "I can't help with that.",
  };
}

const std::string& EnvConfig::feedback_template(std::string_view key) const {
  auto it = feedback_templates.find(key);
  if (it == feedback_templates.end()) {
    throw std::out_of_range("missing feedback template: " + std::string(key));
  }
  return it->second;
}

std::vector<std::string> validate_env_config(const EnvConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.max_turns < 1) errors.emplace_back("max_turns must be at least 1");
  for (auto key : required_template_keys()) {
    if (!cfg.feedback_templates.contains(key)) {
      errors.push_back("feedback template '" + std::string(key) + "' is missing");
    }
  }
  if (cfg.prompt_template.find("{question}") == std::string::npos) {
    errors.emplace_back("prompt_template must contain {question}");
  }
  if (cfg.noise_sentences < 0) errors.emplace_back("noise_sentences must be non-negative");
  if (cfg.condition == FeedbackCondition::Noisy && cfg.noise_sentences > 0 &&
      cfg.distractors.empty()) {
    errors.emplace_back("distractors must be non-empty under the noisy condition");
  }
  if (cfg.condition == FeedbackCondition::Uninformative && cfg.evasive_pool.empty()) {
    errors.emplace_back("evasive_pool must be non-empty under the uninformative condition");
  }
  return errors;
}

std::vector<std::string> validate_reward_config(const RewardConfig& cfg) {
  std::vector<std::string> errors;
  // Negated comparisons so NaN fails every check.
  if (!(cfg.r_base > 0.0)) errors.emplace_back("r_base must be positive");
  if (!(cfg.gamma_d > 0.0 && cfg.gamma_d < 1.0)) {
    errors.emplace_back("gamma_d must lie strictly in (0,1)");
  }
  if (!(cfg.r_correct > 0.0)) errors.emplace_back("r_correct must be positive");
  if (!(cfg.lambda >= 0.0)) errors.emplace_back("lambda must be non-negative");
  if (!(cfg.alpha >= 0.0)) errors.emplace_back("alpha must be non-negative");
  if (!(cfg.beta >= 0.0)) errors.emplace_back("beta must be non-negative");
  for (double v : {cfg.r_base, cfg.r_correct, cfg.lambda, cfg.alpha, cfg.beta}) {
    if (std::isinf(v)) {
      errors.emplace_back("reward parameters must be finite");
      break;
    }
  }
  return errors;
}

std::string_view to_string(ProblemKind v) { return name_of(kKinds, v); }
std::string_view to_string(Role v) { return name_of(kRoles, v); }
std::string_view to_string(ActionKind v) { return name_of(kActions, v); }
std::string_view to_string(FeedbackCondition v) { return name_of(kConditions, v); }
std::string_view to_string(Outcome v) { return name_of(kOutcomes, v); }
std::string_view to_string(TurnEvent v) { return name_of(kEvents, v); }

std::optional<ProblemKind> problem_kind_from_string(std::string_view s) { return lookup(kKinds, s); }
std::optional<Role> role_from_string(std::string_view s) { return lookup(kRoles, s); }
std::optional<ActionKind> action_kind_from_string(std::string_view s) { return lookup(kActions, s); }
std::optional<FeedbackCondition> condition_from_string(std::string_view s) {
  return lookup(kConditions, s);
}
std::optional<Outcome> outcome_from_string(std::string_view s) { return lookup(kOutcomes, s); }
std::optional<TurnEvent> turn_event_from_string(std::string_view s) { return lookup(kEvents, s); }

}  // namespace gril

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gril {

enum class ProblemKind { Incomplete, Complete };

/// One task item. Incomplete problems carry the withheld premise.
struct Problem {
  std::string id;
  ProblemKind kind = ProblemKind::Complete;
  std::string question;
  std::optional<std::string> missing_premise;
  std::string gold_answer;
  std::optional<std::string> source;

  bool operator==(const Problem&) const = default;
};

std::vector<std::string> validate_problem(const Problem& p);

enum class Role { System, User, Assistant };

struct Message {
  Role role = Role::User;
  std::string content;
  int turn = 0;  // 0 for the pre-dialogue prompt block

  bool operator==(const Message&) const = default;
};

enum class ActionKind { Solve, Clarify, Malformed };

/// How the environment answers a clarification request. Standard is the
/// training dynamics; the others are evaluation protocols.
enum class FeedbackCondition {
  Standard,
  ForcedFeedback,  // premise injected after turn 1 whatever the action was
  Noisy,           // premise feedback padded with off-topic sentences
  Uninformative,   // clarification answered evasively, premise never given
};

namespace template_key {
inline constexpr std::string_view kSystem = "system";
inline constexpr std::string_view kDetection = "detection";
inline constexpr std::string_view kForcedPremise = "forced_premise";
inline constexpr std::string_view kNegative = "negative";
inline constexpr std::string_view kUnnecessary = "unnecessary";
inline constexpr std::string_view kFormatError = "format_error";
inline constexpr std::string_view kReminder = "reminder";
}  // namespace template_key

/// Every key an EnvConfig's feedback_templates must define.
const std::vector<std::string_view>& required_template_keys();

std::map<std::string, std::string, std::less<>> default_feedback_templates();
std::string default_prompt_template();
std::vector<std::string> default_distractors();
std::vector<std::string> default_evasive_pool();

struct EnvConfig {
  int max_turns = 4;
  std::map<std::string, std::string, std::less<>> feedback_templates = default_feedback_templates();
  std::string prompt_template = default_prompt_template();
  bool strict_format = false;

  FeedbackCondition condition = FeedbackCondition::Standard;
  std::uint64_t condition_seed = 0;
  int noise_sentences = 2;
  std::vector<std::string> distractors = default_distractors();
  std::vector<std::string> evasive_pool = default_evasive_pool();

  const std::string& feedback_template(std::string_view key) const;
};

std::vector<std::string> validate_env_config(const EnvConfig& cfg);

struct RewardConfig {
  double r_base = 1.0;
  double gamma_d = 0.5;
  double r_correct = 1.0;
  double lambda = 2.0;
  double alpha = 0.3;
  double beta = 0.7;
};

/// Every violated invariant, in a fixed order. Empty means valid.
std::vector<std::string> validate_reward_config(const RewardConfig& cfg);

struct RewardBreakdown {
  double detect = 0.0;
  double solve = 0.0;
  double comp = 0.0;
  int n_prior = 0;
  double total = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

enum class Outcome { SolvedCorrect, SolvedWrong, ExhaustedTurns, GracefulStop };

enum class TurnEvent {
  PremiseProvided,
  NegativeFeedback,
  UnnecessaryClarification,
  FormatError,
  Terminal,
  ForcedPremise,  // ForcedFeedback condition: premise injected without detection
  EvasiveReply,   // Uninformative condition: clarification answered evasively
};

/// Audit flags attached to turn records.
namespace audit {
inline constexpr std::string_view kClarifyAfterPremise = "clarify_after_premise";
inline constexpr std::string_view kSolveWithInsufficiencyProse = "solve_with_insufficiency_prose";
inline constexpr std::string_view kMalformedDuplicateTags = "duplicate_tags";
}  // namespace audit

struct TurnRecord {
  int turn = 1;
  Message assistant;
  ActionKind action = ActionKind::Malformed;
  std::optional<Message> feedback;
  double turn_reward = 0.0;
  TurnEvent event = TurnEvent::FormatError;
  std::vector<std::string> audit;

  bool operator==(const TurnRecord&) const = default;
};

struct Trajectory {
  std::string problem_id;
  ProblemKind kind = ProblemKind::Complete;
  FeedbackCondition condition = FeedbackCondition::Standard;
  std::vector<TurnRecord> turns;
  std::optional<Outcome> outcome;        // absent for live or interrupted episodes
  std::optional<RewardBreakdown> reward;  // absent until finalized
  bool detected = false;
  std::optional<int> detection_turn;
  int unnecessary_clarifications = 0;
  bool interrupted = false;

  bool operator==(const Trajectory&) const = default;
};

std::string_view to_string(ProblemKind v);
std::string_view to_string(Role v);
std::string_view to_string(ActionKind v);
std::string_view to_string(FeedbackCondition v);
std::string_view to_string(Outcome v);
std::string_view to_string(TurnEvent v);

std::optional<ProblemKind> problem_kind_from_string(std::string_view s);
std::optional<Role> role_from_string(std::string_view s);
std::optional<ActionKind> action_kind_from_string(std::string_view s);
std::optional<FeedbackCondition> condition_from_string(std::string_view s);
std::optional<Outcome> outcome_from_string(std::string_view s);
std::optional<TurnEvent> turn_event_from_string(std::string_view s);

}  // namespace gril

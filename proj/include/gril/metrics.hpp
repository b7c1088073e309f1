#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gril/core.hpp"
#include "gril/judge.hpp"
#include "gril/serialize.hpp"

namespace gril {

class Policy;

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Splits text into token byte ranges. Reports carry the tokenizer name since
/// lengths are only comparable under one tokenizer.
struct Tokenizer {
  std::string name;
  std::function<std::vector<TokenSpan>(std::string_view)> split;

  std::size_t count(std::string_view s) const { return split(s).size(); }
};

Tokenizer whitespace_tokenizer();

std::vector<std::string> default_uncertainty_lexicon();

/// Hex FNV-1a over the newline-joined phrases.
std::string lexicon_hash(const std::vector<std::string>& lexicon);

// ---- Standard evaluation -------------------------------------------------

struct EvalReport {
  double success_rate = 0.0;
  double premise_detection = 0.0;
  double avg_turns = 0.0;
  double avg_length_tokens = 0.0;
  double avg_first_turn_length_tokens = 0.0;
  int n_episodes = 0;
  int n_incomplete = 0;
  int n_solved = 0;
  int n_detected = 0;
};

/// SR over all episodes; PD over Incomplete episodes (any-turn detection);
/// NT counts failures as max_turns; Length sums assistant tokens per episode.
/// Throws EmptyInputError on an empty set.
EvalReport evaluate(std::span<const Trajectory> trajectories, const Tokenizer& tokenizer,
                    int max_turns = 4);

// ---- GapRatio -------------------------------------------------------------

struct GapMeasurement {
  std::int64_t total_tokens = 0;
  std::optional<std::int64_t> suspect_position;
  double gap_ratio = 0.0;
};

/// Tokens after the first uncertainty phrase as a fraction of all tokens,
/// over the newline-joined assistant texts. No match gives 0.
/// Throws std::invalid_argument on an empty lexicon or empty text.
GapMeasurement gap_ratio(std::span<const std::string> assistant_texts,
                         const std::vector<std::string>& lexicon, const Tokenizer& tokenizer);

GapMeasurement gap_ratio(const Trajectory& trajectory, const std::vector<std::string>& lexicon,
                         const Tokenizer& tokenizer);

// ---- Forced feedback ------------------------------------------------------

struct ForcedFeedbackReport {
  double dcr = 0.0;  // P(success | detected on turn 1)
  double ncr = 0.0;  // P(success | not detected on turn 1)
  int n_detected = 0;
  int n_not_detected = 0;
  int n_detected_success = 0;
  int n_not_detected_success = 0;
};

/// Partition by turn-1 detection; empty partitions report a rate of 0.
ForcedFeedbackReport forced_feedback_report(std::span<const Trajectory> trajectories);

struct ForcedFeedbackRun {
  ForcedFeedbackReport report;
  std::vector<Trajectory> trajectories;
};

/// Runs every problem under the forced-feedback condition. All problems
/// must be Incomplete (ValidationError otherwise).
ForcedFeedbackRun forced_feedback_eval(Policy& policy, std::span<const Problem> problems,
                                       EnvConfig env_cfg, const RewardConfig& reward_cfg,
                                       const JudgeConfig& judge_cfg);

// ---- Detection as binary classification ------------------------------------

struct Confusion {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;

  bool operator==(const Confusion&) const = default;
};

struct DetectionClassificationReport {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  Confusion confusion;
};

/// Harmonic mean; 0 when precision + recall is 0.
double f1_score(double precision, double recall);

/// Positive class: Incomplete. Positive prediction: Clarify on turn 1.
DetectionClassificationReport detection_classification(
    std::span<const std::pair<ProblemKind, ActionKind>> turn1_actions);

/// (kind, turn-1 action) per trajectory; trajectories without turns are skipped.
std::vector<std::pair<ProblemKind, ActionKind>> turn1_actions(std::span<const Trajectory> trajectories);

// ---- Robustness conditions -------------------------------------------------

struct RobustnessReport {
  FeedbackCondition condition = FeedbackCondition::Standard;
  double success_rate = 0.0;
  int n_episodes = 0;
  int n_success = 0;
};

RobustnessReport robustness_report(std::span<const Trajectory> trajectories,
                                   FeedbackCondition condition);

// ---- Report files ---------------------------------------------------------

struct ReportProvenance {
  std::string tokenizer;
  std::string lexicon_hash;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
};

Json to_json(const EvalReport& r);
Json to_json(const GapMeasurement& g);
Json to_json(const ForcedFeedbackReport& r);
Json to_json(const DetectionClassificationReport& r);
Json to_json(const RobustnessReport& r);
Json to_json(const ReportProvenance& p);

std::string render_table(const EvalReport& r);
std::string render_table(const ForcedFeedbackReport& r);
std::string render_table(const DetectionClassificationReport& r);
std::string render_table(const RobustnessReport& r);

}  // namespace gril

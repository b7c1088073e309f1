#include "gril/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "gril/errors.hpp"
#include "gril/policy.hpp"
#include "gril/rng.hpp"
#include "gril/robustness.hpp"
#include "gril/text.hpp"

namespace gril {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

Tokenizer whitespace_tokenizer() {
  return Tokenizer{"whitespace", [](std::string_view s) {
                     std::vector<TokenSpan> out;
                     std::size_t i = 0;
                     while (i < s.size()) {
                       while (i < s.size() && text::is_space(s[i])) ++i;
                       if (i == s.size()) break;
                       std::size_t b = i;
                       while (i < s.size() && !text::is_space(s[i])) ++i;
                       out.push_back({b, i});
                     }
                     return out;
                   }};
}

std::vector<std::string> default_uncertainty_lexicon() {
  return {"we need to know",   "this requires",            "cannot determine",
          "does not provide",  "insufficient information", "without knowing"};
}

std::string lexicon_hash(const std::vector<std::string>& lexicon) {
  std::string joined;
  for (const auto& p : lexicon) {
    joined += p;
    joined += '\n';
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(joined)));
  return buf;
}

EvalReport evaluate(std::span<const Trajectory> trajectories, const Tokenizer& tokenizer,
                    int max_turns) {
  if (trajectories.empty()) throw EmptyInputError("evaluate needs at least one trajectory");
  EvalReport r;
  std::int64_t turn_sum = 0;
  std::int64_t token_sum = 0;
  std::int64_t first_turn_tokens = 0;
  for (const auto& t : trajectories) {
    ++r.n_episodes;
    const bool solved = t.outcome == Outcome::SolvedCorrect;
    if (solved) ++r.n_solved;
    if (t.kind == ProblemKind::Incomplete) {
      ++r.n_incomplete;
      if (t.detected) ++r.n_detected;
    }
    turn_sum += solved ? static_cast<std::int64_t>(t.turns.size()) : max_turns;
    for (const auto& rec : t.turns) {
      auto n = static_cast<std::int64_t>(tokenizer.count(rec.assistant.content));
      token_sum += n;
      if (rec.turn == 1) first_turn_tokens += n;
    }
  }
  r.success_rate = ratio(r.n_solved, r.n_episodes);
  r.premise_detection = ratio(r.n_detected, r.n_incomplete);
  r.avg_turns = ratio(turn_sum, r.n_episodes);
  r.avg_length_tokens = ratio(token_sum, r.n_episodes);
  r.avg_first_turn_length_tokens = ratio(first_turn_tokens, r.n_episodes);
  return r;
}

GapMeasurement gap_ratio(std::span<const std::string> assistant_texts,
                         const std::vector<std::string>& lexicon, const Tokenizer& tokenizer) {
  if (lexicon.empty()) throw std::invalid_argument("uncertainty lexicon must be non-empty");
  std::string joined;
  for (std::size_t i = 0; i < assistant_texts.size(); ++i) {
    if (i > 0) joined += '\n';
    joined += assistant_texts[i];
  }
  const auto tokens = tokenizer.split(joined);
  if (tokens.empty()) throw std::invalid_argument("gap_ratio needs non-empty text");

  const std::string haystack = text::to_lower(joined);
  std::size_t first = std::string::npos;
  for (const auto& phrase : lexicon) {
    std::string needle = text::to_lower(text::trim(phrase));
    if (needle.empty()) throw std::invalid_argument("lexicon phrases must be non-empty");
    first = std::min(first, haystack.find(needle));
  }

  GapMeasurement g;
  g.total_tokens = static_cast<std::int64_t>(tokens.size());
  if (first == std::string::npos) return g;
  auto it = std::find_if(tokens.begin(), tokens.end(), [&](const TokenSpan& t) { return t.end > first; });
  g.suspect_position = static_cast<std::int64_t>(it - tokens.begin());
  g.gap_ratio = static_cast<double>(g.total_tokens - *g.suspect_position) /
                static_cast<double>(g.total_tokens);
  return g;
}

GapMeasurement gap_ratio(const Trajectory& trajectory, const std::vector<std::string>& lexicon,
                         const Tokenizer& tokenizer) {
  std::vector<std::string> texts;
  texts.reserve(trajectory.turns.size());
  for (const auto& rec : trajectory.turns) texts.push_back(rec.assistant.content);
  return gap_ratio(texts, lexicon, tokenizer);
}

ForcedFeedbackReport forced_feedback_report(std::span<const Trajectory> trajectories) {
  ForcedFeedbackReport r;
  for (const auto& t : trajectories) {
    const bool success = t.outcome == Outcome::SolvedCorrect;
    if (t.detected && t.detection_turn == 1) {
      ++r.n_detected;
      if (success) ++r.n_detected_success;
    } else {
      ++r.n_not_detected;
      if (success) ++r.n_not_detected_success;
    }
  }
  r.dcr = ratio(r.n_detected_success, r.n_detected);
  r.ncr = ratio(r.n_not_detected_success, r.n_not_detected);
  return r;
}

ForcedFeedbackRun forced_feedback_eval(Policy& policy, std::span<const Problem> problems,
                                       EnvConfig env_cfg, const RewardConfig& reward_cfg,
                                       const JudgeConfig& judge_cfg) {
  std::vector<std::string> errors;
  for (const auto& p : problems) {
    if (p.kind != ProblemKind::Incomplete) {
      errors.push_back("problem '" + p.id + "' is not Incomplete");
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  env_cfg.condition = FeedbackCondition::ForcedFeedback;
  ForcedFeedbackRun run;
  run.trajectories.reserve(problems.size());
  for (const auto& p : problems) {
    run.trajectories.push_back(rollout(policy, p, env_cfg, reward_cfg, judge_cfg));
  }
  run.report = forced_feedback_report(run.trajectories);
  return run;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

DetectionClassificationReport detection_classification(
    std::span<const std::pair<ProblemKind, ActionKind>> turn1_actions) {
  if (turn1_actions.empty()) throw EmptyInputError("detection_classification needs input");
  DetectionClassificationReport r;
  for (const auto& [kind, action] : turn1_actions) {
    const bool actual = kind == ProblemKind::Incomplete;
    const bool predicted = action == ActionKind::Clarify;
    if (actual && predicted) ++r.confusion.tp;
    if (!actual && predicted) ++r.confusion.fp;
    if (actual && !predicted) ++r.confusion.fn;
    if (!actual && !predicted) ++r.confusion.tn;
  }
  r.recall = ratio(r.confusion.tp, r.confusion.tp + r.confusion.fn);
  r.precision = ratio(r.confusion.tp, r.confusion.tp + r.confusion.fp);
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

std::vector<std::pair<ProblemKind, ActionKind>> turn1_actions(std::span<const Trajectory> trajectories) {
  std::vector<std::pair<ProblemKind, ActionKind>> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (!t.turns.empty()) out.emplace_back(t.kind, t.turns.front().action);
  }
  return out;
}

RobustnessReport robustness_report(std::span<const Trajectory> trajectories,
                                   FeedbackCondition condition) {
  if (trajectories.empty()) throw EmptyInputError("robustness_report needs at least one trajectory");
  RobustnessReport r;
  r.condition = condition;
  for (const auto& t : trajectories) {
    ++r.n_episodes;
    if (condition_success(t, condition)) ++r.n_success;
  }
  r.success_rate = ratio(r.n_success, r.n_episodes);
  return r;
}

Json to_json(const EvalReport& r) {
  Json j;
  j["success_rate"] = r.success_rate;
  j["premise_detection"] = r.premise_detection;
  j["avg_turns"] = r.avg_turns;
  j["avg_length_tokens"] = r.avg_length_tokens;
  j["avg_first_turn_length_tokens"] = r.avg_first_turn_length_tokens;
  j["n_episodes"] = r.n_episodes;
  j["n_incomplete"] = r.n_incomplete;
  j["n_solved"] = r.n_solved;
  j["n_detected"] = r.n_detected;
  return j;
}

Json to_json(const GapMeasurement& g) {
  Json j;
  j["total_tokens"] = g.total_tokens;
  j["suspect_position"] = g.suspect_position ? Json(*g.suspect_position) : Json(nullptr);
  j["gap_ratio"] = g.gap_ratio;
  return j;
}

Json to_json(const ForcedFeedbackReport& r) {
  Json j;
  j["dcr"] = r.dcr;
  j["ncr"] = r.ncr;
  j["n_detected"] = r.n_detected;
  j["n_not_detected"] = r.n_not_detected;
  j["n_detected_success"] = r.n_detected_success;
  j["n_not_detected_success"] = r.n_not_detected_success;
  return j;
}

Json to_json(const DetectionClassificationReport& r) {
  Json j;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  j["confusion"] = Json{{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn},
                        {"tn", r.confusion.tn}};
  return j;
}

Json to_json(const RobustnessReport& r) {
  Json j;
  j["condition"] = to_string(r.condition);
  j["success_rate"] = r.success_rate;
  j["n_episodes"] = r.n_episodes;
  j["n_success"] = r.n_success;
  return j;
}

Json to_json(const ReportProvenance& p) {
  Json j;
  j["tokenizer"] = p.tokenizer;
  j["lexicon_hash"] = p.lexicon_hash;
  Json seeds = Json::object();
  for (const auto& [name, value] : p.seeds) seeds[name] = value;
  j["seeds"] = std::move(seeds);
  return j;
}

std::string render_table(const EvalReport& r) {
  std::ostringstream os;
  os << "| SR    | PD    | NT   | Length  | N    |\n"
     << "|-------|-------|------|---------|------|\n"
     << "| " << fixed(100.0 * r.success_rate, 1) << " | " << fixed(100.0 * r.premise_detection, 1)
     << " | " << fixed(r.avg_turns, 2) << " | " << fixed(r.avg_length_tokens, 1) << " | "
     << r.n_episodes << " |\n";
  return os.str();
}

std::string render_table(const ForcedFeedbackReport& r) {
  std::ostringstream os;
  os << "| DCR   | NCR   | detected | not detected |\n"
     << "|-------|-------|----------|--------------|\n"
     << "| " << fixed(100.0 * r.dcr, 1) << " | " << fixed(100.0 * r.ncr, 1) << " | " << r.n_detected
     << " | " << r.n_not_detected << " |\n";
  return os.str();
}

std::string render_table(const DetectionClassificationReport& r) {
  std::ostringstream os;
  os << "| Recall | Precision | F1    | TP | FP | FN | TN |\n"
     << "|--------|-----------|-------|----|----|----|----|\n"
     << "| " << fixed(r.recall) << " | " << fixed(r.precision) << " | " << fixed(r.f1) << " | "
     << r.confusion.tp << " | " << r.confusion.fp << " | " << r.confusion.fn << " | "
     << r.confusion.tn << " |\n";
  return os.str();
}

std::string render_table(const RobustnessReport& r) {
  std::ostringstream os;
  os << "| Condition | SR    | N    |\n"
     << "|-----------|-------|------|\n"
     << "| " << to_string(r.condition) << " | " << fixed(100.0 * r.success_rate, 1) << " | "
     << r.n_episodes << " |\n";
  return os.str();
}

}  // namespace gril

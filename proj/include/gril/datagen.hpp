#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gril/chat_client.hpp"
#include "gril/core.hpp"

// Incomplete-problem construction by premise masking, and dataset assembly.
namespace gril {

struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const SentenceSpan&) const = default;
};

/// Byte ranges of each sentence. Text between spans is separator whitespace,
/// so the spans plus the gaps reassemble the input exactly. Boundaries sit
/// after '.', '?' or '!' (plus closing quotes/brackets) followed by
/// whitespace, except after common abbreviations and single initials.
std::vector<SentenceSpan> sentence_spans(std::string_view text);

std::vector<std::string> segment_sentences(std::string_view text);

struct MaskCandidate {
  int sentence_index = 0;
  std::string sentence;

  bool operator==(const MaskCandidate&) const = default;
};

bool is_question(std::string_view sentence);

/// Sentences that contain a digit and are not questions, in order.
std::vector<MaskCandidate> candidate_premises(std::span<const std::string> sentences);

enum class MaskLabel { Essential, Redundant, Unlabeled };

std::string_view to_string(MaskLabel v);

struct MaskedProblem {
  Problem original;
  std::string masked_question;
  std::string masked_sentence;
  int sentence_index = 0;
  MaskLabel label = MaskLabel::Unlabeled;
};

/// Remove one uniformly sampled candidate sentence. Absent when the question
/// has no candidates (or all are excluded). Requires a Complete problem.
std::optional<MaskedProblem> mask_problem(const Problem& problem, std::uint64_t seed,
                                          std::span<const int> excluded_indices = {});

enum class SolvabilityVerdict { Solvable, Unsolvable };

/// Oracle failure that left the item untouched; the caller may retry.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decides whether a masked question is still solvable. Implementations are
/// called concurrently when the builder runs with jobs > 1.
class SolvabilityOracle {
 public:
  virtual ~SolvabilityOracle() = default;
  virtual SolvabilityVerdict judge(const MaskedProblem& masked) = 0;
  virtual std::string name() const = 0;
};

/// Treats every mask as essential.
class PermissiveOracle final : public SolvabilityOracle {
 public:
  SolvabilityVerdict judge(const MaskedProblem&) override { return SolvabilityVerdict::Unsolvable; }
  std::string name() const override { return "permissive"; }
};

/// Unsolvable iff some digit of the gold answer no longer appears in the
/// masked question. Cheap and deterministic; unreliable on corpora whose
/// questions quote their own answers.
class DigitLeakOracle final : public SolvabilityOracle {
 public:
  SolvabilityVerdict judge(const MaskedProblem& masked) override;
  std::string name() const override { return "digit-leak"; }
};

/// Asks a chat endpoint (temperature 0) whether the masked question is solvable.
class ChatOracle final : public SolvabilityOracle {
 public:
  explicit ChatOracle(RemoteEndpoint endpoint);
  SolvabilityVerdict judge(const MaskedProblem& masked) override;
  std::string name() const override { return "chat:" + client_.endpoint().model_name; }

  static std::string prompt_for(std::string_view masked_question);

 private:
  ChatClient client_;
};

/// Unsolvable -> Essential, Solvable -> Redundant. Throws ContractError if
/// already labeled; OracleError propagates with `masked` unchanged.
MaskedProblem label_with_oracle(MaskedProblem masked, SolvabilityOracle& oracle);

struct BuildOptions {
  double incomplete_fraction = 0.5;
  std::uint64_t seed = 0;
  int retry_masks = 0;  // extra masks tried on an item whose first mask is Redundant
  int jobs = 1;         // concurrent oracle calls
  std::string default_source = "corpus";
};

std::vector<std::string> validate_build_options(const BuildOptions& opts);

struct BuildSummary {
  int complete = 0;
  int incomplete = 0;
  int dropped_redundant = 0;
  int no_candidate = 0;
  int leaked = 0;  // masked sentence still present elsewhere in the question
  int oracle_calls = 0;
};

struct DatasetBuild {
  std::vector<Problem> problems;
  BuildSummary summary;
};

class ShortfallError : public std::runtime_error {
 public:
  ShortfallError(int achievable, int corpus_size);
  int achievable_incomplete() const noexcept { return achievable_; }
  double achievable_fraction() const noexcept { return fraction_; }

 private:
  int achievable_;
  double fraction_;
};

/// Emits round(fraction * N) Incomplete items built from Essential masks and
/// the remaining corpus items as Complete, in a seeded shuffled order. Each
/// corpus item contributes exactly one output item.
DatasetBuild build_dataset(std::span<const Problem> corpus, SolvabilityOracle& oracle,
                           const BuildOptions& opts);

/// Seeded sample of ceil(fraction * N) items for manual annotation.
std::vector<Problem> audit_sample(std::span<const Problem> dataset, double fraction, std::uint64_t seed);

/// Dataset lines with an extra empty `human_label` field.
void write_audit_file(std::ostream& out, std::span<const Problem> sample);

}  // namespace gril

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gril/core.hpp"

namespace gril {

/// A model output split into its think/answer spans.
struct ParsedResponse {
  std::optional<std::string> think;
  std::optional<std::string> answer;
  bool well_formed = false;
  std::string raw;
  bool duplicate_tags = false;  // more than one think or answer pair present

  bool operator==(const ParsedResponse&) const = default;
};

/// Spans are the exact inner text of the first `<think>` pair and the first
/// `<answer>` pair after it. Lenient mode tolerates outside text and
/// duplicates; strict mode allows only whitespace outside the two blocks.
ParsedResponse parse_response(std::string_view raw, bool strict);

ActionKind classify_action(const ParsedResponse& p);

/// Normalized answer text. Throws ContractError unless classify_action(p) is Solve.
std::string extract_final_answer(const ParsedResponse& p);

/// Normalization applied by extract_final_answer, exposed for already-extracted text.
std::string normalize_answer(std::string_view answer);

/// Audit flags for responses whose classification is ambiguous.
std::vector<std::string> audit_flags(const ParsedResponse& p, ActionKind action);

}  // namespace gril

#include "gril/parser.hpp"

#include "gril/errors.hpp"
#include "gril/text.hpp"

namespace gril {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";
constexpr std::string_view kInsufficient = "insufficient information";

struct Span {
  std::size_t open = std::string_view::npos;   // position of the opening tag
  std::size_t inner = 0;                       // first byte of content
  std::size_t close = std::string_view::npos;  // position of the closing tag
  std::size_t end = 0;                         // one past the closing tag

  bool found() const { return open != std::string_view::npos; }
};

Span find_pair(std::string_view s, std::string_view open, std::string_view close,
               std::size_t from) {
  Span span;
  auto o = s.find(open, from);
  if (o == std::string_view::npos) return span;
  auto c = s.find(close, o + open.size());
  if (c == std::string_view::npos) return span;
  span.open = o;
  span.inner = o + open.size();
  span.close = c;
  span.end = c + close.size();
  return span;
}

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

bool only_whitespace(std::string_view s) { return text::trim(s).empty(); }

// Strips surrounding math delimiter pairs until none remain.
std::string_view strip_math_delimiters(std::string_view s) {
  constexpr std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\\(", "\\)"}, {"\\[", "\\]"}, {"$$", "$$"}, {"$", "$"}};
  s = text::trim(s);
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const auto& [open, close] : kPairs) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = text::trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        stripped = true;
        break;
      }
    }
  }
  return s;
}

// Content of the last top-level balanced \boxed{...} in s. Boxes nested
// inside it are left as they are.
std::optional<std::string_view> last_boxed(std::string_view s) {
  constexpr std::string_view kBoxed = "\\boxed{";
  std::optional<std::string_view> found;
  std::size_t pos = s.find(kBoxed);
  while (pos != std::string_view::npos) {
    std::size_t depth = 1;
    std::size_t i = pos + kBoxed.size();
    for (; i < s.size() && depth > 0; ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}') --depth;
    }
    if (depth != 0) break;  // unbalanced: nothing after it can be top-level
    const std::size_t inner = pos + kBoxed.size();
    found = s.substr(inner, i - 1 - inner);
    pos = s.find(kBoxed, i);
  }
  return found;
}

}  // namespace

ParsedResponse parse_response(std::string_view raw, bool strict) {
  ParsedResponse out;
  out.raw = std::string(raw);

  Span think = find_pair(raw, kThinkOpen, kThinkClose, 0);
  Span answer = find_pair(raw, kAnswerOpen, kAnswerClose, think.found() ? think.end : 0);

  if (think.found()) out.think = std::string(raw.substr(think.inner, think.close - think.inner));
  if (answer.found()) {
    out.answer = std::string(raw.substr(answer.inner, answer.close - answer.inner));
  }

  out.duplicate_tags = count_occurrences(raw, kThinkOpen) > 1 ||
                       count_occurrences(raw, kAnswerOpen) > 1 ||
                       count_occurrences(raw, kThinkClose) > 1 ||
                       count_occurrences(raw, kAnswerClose) > 1;

  out.well_formed = think.found() && answer.found();
  if (out.well_formed && strict) {
    out.well_formed = !out.duplicate_tags && only_whitespace(raw.substr(0, think.open)) &&
                      only_whitespace(raw.substr(think.end, answer.open - think.end)) &&
                      only_whitespace(raw.substr(answer.end));
  }
  return out;
}

ActionKind classify_action(const ParsedResponse& p) {
  if (!p.well_formed || !p.answer || text::trim(*p.answer).empty()) return ActionKind::Malformed;
  std::string normalized = text::to_lower(text::collapse_whitespace(*p.answer));
  if (normalized.find(kInsufficient) != std::string::npos) return ActionKind::Clarify;
  return ActionKind::Solve;
}

std::string normalize_answer(std::string_view answer) {
  std::string_view s = strip_math_delimiters(answer);
  if (auto boxed = last_boxed(s)) s = strip_math_delimiters(*boxed);
  return text::collapse_whitespace(s);
}

std::string extract_final_answer(const ParsedResponse& p) {
  if (classify_action(p) != ActionKind::Solve) {
    throw ContractError("extract_final_answer requires a Solve response");
  }
  return normalize_answer(*p.answer);
}

std::vector<std::string> audit_flags(const ParsedResponse& p, ActionKind action) {
  std::vector<std::string> flags;
  if (p.duplicate_tags) flags.emplace_back(audit::kMalformedDuplicateTags);
  if (action == ActionKind::Solve && p.think) {
    std::string think = text::to_lower(text::collapse_whitespace(*p.think));
    if (think.find(kInsufficient) != std::string::npos) {
      flags.emplace_back(audit::kSolveWithInsufficiencyProse);
    }
  }
  return flags;
}

}  // namespace gril

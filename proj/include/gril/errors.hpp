#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gril {

/// A caller broke an operation's precondition (stepping a finished session,
/// extracting an answer from a non-Solve response, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input data failed validation. Carries every violation, not just the first.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A network round trip failed after the retry budget was spent.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int attempts)
      : std::runtime_error(what), attempts_(attempts) {}

  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// An aggregate was asked of an empty input set.
class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string join_violations(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

inline ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error("validation failed: " + join_violations(violations)),
      violations_(std::move(violations)) {}

}  // namespace gril

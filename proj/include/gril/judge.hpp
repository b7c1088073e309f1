#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gril {

struct JudgeConfig {
  double numeric_tolerance = 1e-6;  // relative
  bool case_sensitive = false;
};

std::vector<std::string> validate_judge_config(const JudgeConfig& cfg);

/// Parses integers, decimals, simple fractions ("3/4") and scientific
/// notation; comma thousands separators are dropped first. Rejects nan/inf.
std::optional<double> parse_number(std::string_view s);

/// True when both sides parse as numbers that agree within the relative
/// tolerance (absolute 1e-9 near zero), or when the texts are equal after
/// whitespace collapse under the configured casing. Symmetric.
bool check_answer(std::string_view candidate, std::string_view gold, const JudgeConfig& cfg = {});

}  // namespace gril

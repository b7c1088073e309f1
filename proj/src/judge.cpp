#include "gril/judge.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "gril/text.hpp"

namespace gril {

namespace {

constexpr double kAbsoluteFloor = 1e-9;

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// "1,000" / "12,345,678.5" style grouping only; anything else keeps its commas.
std::optional<std::string> strip_thousands(std::string_view s) {
  if (s.find(',') == std::string_view::npos) return std::string(s);
  std::size_t start = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  std::size_t int_end = s.find('.', start);
  if (int_end == std::string_view::npos) int_end = s.size();
  std::string_view int_part = s.substr(start, int_end - start);
  std::size_t first_comma = int_part.find(',');
  if (first_comma == 0 || first_comma > 3) return std::nullopt;
  std::size_t group = 0;
  for (std::size_t i = first_comma; i < int_part.size(); ++i) {
    if (int_part[i] == ',') {
      if (i != first_comma && group != 3) return std::nullopt;
      group = 0;
    } else if (is_digit(int_part[i])) {
      ++group;
    } else {
      return std::nullopt;
    }
  }
  if (group != 3) return std::nullopt;
  if (s.substr(int_end).find(',') != std::string_view::npos) return std::nullopt;
  std::string out(s);
  out.erase(std::remove(out.begin(), out.end(), ','), out.end());
  return out;
}

std::optional<double> parse_plain(std::string_view s) {
  if (s.empty() || !std::any_of(s.begin(), s.end(), is_digit)) return std::nullopt;
  for (char c : s) {
    if (!(is_digit(c) || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E')) {
      return std::nullopt;
    }
  }
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

std::vector<std::string> validate_judge_config(const JudgeConfig& cfg) {
  std::vector<std::string> errors;
  if (!(cfg.numeric_tolerance >= 0.0 && cfg.numeric_tolerance < 1.0)) {
    errors.emplace_back("numeric_tolerance must lie in [0,1)");
  }
  return errors;
}

std::optional<double> parse_number(std::string_view raw) {
  auto stripped = strip_thousands(text::trim(raw));
  if (!stripped) return std::nullopt;
  std::string_view s = *stripped;
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_plain(s);
  auto num = parse_plain(text::trim(s.substr(0, slash)));
  auto den = parse_plain(text::trim(s.substr(slash + 1)));
  if (!num || !den || *den == 0.0) return std::nullopt;
  double value = *num / *den;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

bool check_answer(std::string_view candidate, std::string_view gold, const JudgeConfig& cfg) {
  std::string a = text::collapse_whitespace(candidate);
  std::string b = text::collapse_whitespace(gold);
  auto x = parse_number(a);
  auto y = parse_number(b);
  if (x && y) {
    double scale = std::max(std::fabs(*x), std::fabs(*y));
    double tol = std::max(cfg.numeric_tolerance * scale, kAbsoluteFloor);
    if (std::fabs(*x - *y) <= tol) return true;
  }
  if (!cfg.case_sensitive) {
    a = text::to_lower(a);
    b = text::to_lower(b);
  }
  return a == b;
}

}  // namespace gril

#pragma once

#include <string>
#include <string_view>

// Small ASCII string helpers shared across modules.
namespace gril::text {

bool is_space(char c) noexcept;

std::string_view trim(std::string_view s) noexcept;

/// Trim, then replace every internal run of whitespace with one space.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

bool contains_digit(std::string_view s) noexcept;

/// Replace each `{key}` occurrence with the mapped value; unknown keys are left verbatim.
template <typename Lookup>
std::string render(std::string_view tmpl, Lookup&& lookup) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto key = tmpl.substr(i + 1, close - i - 1);
        if (const std::string* value = lookup(key)) {
          out += *value;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace gril::text

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gril {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `gril` tool. args excludes the program name. The
/// input stream feeds `rollout --human`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace gril

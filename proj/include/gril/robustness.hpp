#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gril/core.hpp"

// Feedback perturbations for the robustness evaluation conditions.
namespace gril {

/// Interleave `k` seeded-sampled distractor sentences before and after the
/// premise feedback. The feedback text itself stays intact and contiguous.
/// Throws std::invalid_argument when k > 0 and the pool is empty.
std::string inject_noise(std::string_view premise_feedback, const std::vector<std::string>& distractors,
                         std::uint64_t seed, int k = 2);

/// Seeded pick from the evasive-reply pool; seed 0 selects the first entry.
std::string uninformative_response(std::uint64_t seed,
                                   const std::vector<std::string>& pool = default_evasive_pool());

/// Whether an episode counts as a success under the given condition.
/// Uninformative: graceful termination; every other condition: a correct solve.
bool condition_success(const Trajectory& t, FeedbackCondition condition);

}  // namespace gril

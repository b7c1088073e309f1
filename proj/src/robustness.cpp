#include "gril/robustness.hpp"

#include <stdexcept>

#include "gril/rng.hpp"

namespace gril {

std::string inject_noise(std::string_view premise_feedback, const std::vector<std::string>& distractors,
                         std::uint64_t seed, int k) {
  if (k <= 0) return std::string(premise_feedback);
  if (distractors.empty()) throw std::invalid_argument("distractor pool must be non-empty");

  Rng rng(seed);
  std::vector<std::size_t> order(distractors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::string before;
  std::string after;
  for (int i = 0; i < k; ++i) {
    // Without replacement while the pool lasts.
    const std::string& sentence =
        distractors[order[static_cast<std::size_t>(i) % order.size()]];
    if (rng.uniform_index(2) == 0) {
      before += sentence;
      before += ' ';
    } else {
      after += ' ';
      after += sentence;
    }
  }
  return before + std::string(premise_feedback) + after;
}

std::string uninformative_response(std::uint64_t seed, const std::vector<std::string>& pool) {
  if (pool.empty()) throw std::invalid_argument("evasive pool must be non-empty");
  return pool[seed % pool.size()];
}

bool condition_success(const Trajectory& t, FeedbackCondition condition) {
  if (!t.outcome) return false;
  if (condition == FeedbackCondition::Uninformative) return *t.outcome == Outcome::GracefulStop;
  return *t.outcome == Outcome::SolvedCorrect;
}

}  // namespace gril

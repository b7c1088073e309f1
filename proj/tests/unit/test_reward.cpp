#include <doctest.h>

#include <cmath>

#include "gril/errors.hpp"
#include "gril/reward.hpp"
#include "gril/rng.hpp"

using namespace gril;

namespace {
constexpr double kTol = 1e-12;
}

TEST_CASE("detect_reward examples") {
  RewardConfig cfg;
  CHECK(detect_reward(0, cfg) == 1.0);
  CHECK(detect_reward(1, cfg) == 0.5);
  CHECK(detect_reward(3, cfg) == 0.125);
  CHECK_THROWS_AS(detect_reward(-1, cfg), ContractError);
}

TEST_CASE("solve and comp rewards") {
  RewardConfig cfg;
  CHECK(solve_reward(true, cfg) == 1.0);
  CHECK(solve_reward(false, cfg) == 0.0);
  RewardConfig two;
  two.r_correct = 2;
  CHECK(solve_reward(true, two) == 2.0);

  CHECK(comp_reward(true, false, cfg) == 1.0);
  CHECK(comp_reward(true, true, cfg) == -1.0);
  CHECK(comp_reward(false, true, cfg) == -2.0);
  CHECK(comp_reward(false, false, cfg) == 0.0);
}

TEST_CASE("trajectory_reward examples") {
  RewardConfig cfg;
  auto a = trajectory_reward(ProblemKind::Incomplete, true, 0, true, false, cfg);
  CHECK(std::abs(a.total - 1.0) < kTol);
  CHECK(a.detect == 1.0);
  CHECK(a.solve == 1.0);
  CHECK(a.n_prior == 0);

  auto b = trajectory_reward(ProblemKind::Incomplete, true, 1, false, false, cfg);
  CHECK(std::abs(b.total - 0.15) < kTol);

  auto c = trajectory_reward(ProblemKind::Incomplete, true, 1, true, false, cfg);
  CHECK(std::abs(c.total - 0.85) < kTol);

  auto d = trajectory_reward(ProblemKind::Complete, false, 0, true, true, cfg);
  CHECK(std::abs(d.total - -1.0) < kTol);
  CHECK(d.comp == -1.0);

  auto undetected = trajectory_reward(ProblemKind::Incomplete, false, 0, false, false, cfg);
  CHECK(undetected.total == 0.0);
  CHECK(undetected.detect == 0.0);
}

TEST_CASE("inconsistent arguments are contract errors") {
  RewardConfig cfg;
  CHECK_THROWS_AS(trajectory_reward(ProblemKind::Complete, true, 0, true, false, cfg), ContractError);
  CHECK_THROWS_AS(trajectory_reward(ProblemKind::Incomplete, false, 0, true, true, cfg), ContractError);
  CHECK_THROWS_AS(trajectory_reward(ProblemKind::Incomplete, true, -1, true, false, cfg), ContractError);
}

TEST_CASE("gamma_d = 1 makes detection reward flat") {
  // Validation rejects this config; the formula itself is still defined.
  RewardConfig flat;
  flat.gamma_d = 1.0;
  CHECK_FALSE(validate_reward_config(flat).empty());
  for (int n = 0; n < 6; ++n) CHECK(detect_reward(n, flat) == 1.0);
}

namespace {

RewardConfig random_config(Rng& rng) {
  RewardConfig c;
  c.r_base = 0.1 + 4.9 * rng.uniform_real();
  c.gamma_d = 0.01 + 0.98 * rng.uniform_real();
  c.r_correct = 0.1 + 4.9 * rng.uniform_real();
  c.lambda = 5.0 * rng.uniform_real();
  c.alpha = rng.uniform_real();
  c.beta = rng.uniform_real();
  return c;
}

}  // namespace

TEST_CASE("property: detection reward decays strictly and is bounded") {
  Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    RewardConfig c = random_config(rng);
    double prev = detect_reward(0, c);
    CHECK(prev == c.r_base);
    for (int n = 1; n < 12; ++n) {
      const double r = detect_reward(n, c);
      CHECK(r < prev);
      CHECK(r > 0.0);
      CHECK(r <= c.r_base);
      prev = r;
    }
  }
}

TEST_CASE("property: breakdown total recombines bit-for-bit") {
  Rng rng(4);
  for (int i = 0; i < 20000; ++i) {
    RewardConfig c = random_config(rng);
    const bool incomplete = rng.uniform_index(2) == 0;
    const bool detected = incomplete && rng.uniform_index(2) == 0;
    const int n_prior = detected ? static_cast<int>(rng.uniform_index(4)) : 0;
    const bool correct = rng.uniform_index(2) == 0;
    const bool unc = !incomplete && rng.uniform_index(2) == 0;
    const auto kind = incomplete ? ProblemKind::Incomplete : ProblemKind::Complete;
    RewardBreakdown b = trajectory_reward(kind, detected, n_prior, correct, unc, c);
    CHECK(combine_total(kind, b, c) == b.total);
    if (incomplete) {
      CHECK(b.total == c.alpha * b.detect + c.beta * b.solve);
    } else {
      CHECK(b.total == b.comp);
      CHECK(b.comp == comp_reward(correct, unc, c));
    }
  }
}

#pragma once

#include "gril/core.hpp"

// Stage rewards and their trajectory-level combination.
namespace gril {

/// r_base * gamma_d^n_prior. n_prior counts assistant turns before the
/// clarifying turn, so detection on turn t uses n_prior = t - 1.
double detect_reward(int n_prior, const RewardConfig& cfg);

/// r_correct when the solve was judged correct, else 0.
double solve_reward(bool correct, const RewardConfig& cfg);

/// Complete-problem reward: r_correct * 1[correct] - lambda * 1[clarified needlessly].
double comp_reward(bool correct, bool unnecessary_clarified, const RewardConfig& cfg);

/// Recombine stored components into the trajectory total for the given kind.
double combine_total(ProblemKind kind, const RewardBreakdown& parts, const RewardConfig& cfg);

/// Incomplete: alpha * R_detect + beta * R_solve (R_detect = 0 when undetected).
/// Complete: R_comp. Throws ContractError on inconsistent arguments.
RewardBreakdown trajectory_reward(ProblemKind kind, bool detected, int n_prior,
                                  bool solved_correct, bool unnecessary_clarified,
                                  const RewardConfig& cfg);

}  // namespace gril

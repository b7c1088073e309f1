#include "gril/reward.hpp"

#include <cmath>

#include "gril/errors.hpp"

namespace gril {

double detect_reward(int n_prior, const RewardConfig& cfg) {
  if (n_prior < 0) throw ContractError("n_prior must be non-negative");
  return cfg.r_base * std::pow(cfg.gamma_d, n_prior);
}

double solve_reward(bool correct, const RewardConfig& cfg) { return correct ? cfg.r_correct : 0.0; }

double comp_reward(bool correct, bool unnecessary_clarified, const RewardConfig& cfg) {
  return (correct ? cfg.r_correct : 0.0) - (unnecessary_clarified ? cfg.lambda : 0.0);
}

double combine_total(ProblemKind kind, const RewardBreakdown& parts, const RewardConfig& cfg) {
  if (kind == ProblemKind::Complete) return parts.comp;
  return cfg.alpha * parts.detect + cfg.beta * parts.solve;
}

RewardBreakdown trajectory_reward(ProblemKind kind, bool detected, int n_prior,
                                  bool solved_correct, bool unnecessary_clarified,
                                  const RewardConfig& cfg) {
  if (n_prior < 0) throw ContractError("n_prior must be non-negative");
  if (detected && kind == ProblemKind::Complete) {
    throw ContractError("detection is only defined for Incomplete problems");
  }
  if (unnecessary_clarified && kind == ProblemKind::Incomplete) {
    throw ContractError("unnecessary clarification is only defined for Complete problems");
  }

  RewardBreakdown out;
  out.n_prior = detected ? n_prior : 0;
  out.solve = solve_reward(solved_correct, cfg);
  if (kind == ProblemKind::Incomplete) {
    out.detect = detected ? detect_reward(n_prior, cfg) : 0.0;
  } else {
    out.comp = comp_reward(solved_correct, unnecessary_clarified, cfg);
  }
  out.total = combine_total(kind, out, cfg);
  return out;
}

}  // namespace gril

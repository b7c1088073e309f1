#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gril/chat_client.hpp"
#include "gril/core.hpp"
#include "gril/env.hpp"
#include "gril/judge.hpp"

namespace gril {

enum class PolicyKind { Scripted, AlwaysSolve, AlwaysClarify, Remote };

struct PolicySpec {
  PolicyKind kind = PolicyKind::AlwaysClarify;
  std::vector<std::string> script;
  std::optional<RemoteEndpoint> endpoint;
};

std::vector<std::string> validate_policy_spec(const PolicySpec& spec);

inline constexpr std::string_view kAlwaysClarifyText =
    "<think>Missing information.</think><answer>insufficient information</answer>";
inline constexpr std::string_view kAlwaysSolveText =
    "<think>Solving directly with the given numbers.</think><answer>\\boxed{-1}</answer>";

class ScriptExhaustedError : public std::runtime_error {
 public:
  ScriptExhaustedError(std::size_t script_length)
      : std::runtime_error("script exhausted after " + std::to_string(script_length) + " responses") {}
};

/// Produces the next assistant text from the visible history.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string next_response(std::span<const Message> history) = 0;
};

/// Adapts any callable; handy for tests and bindings.
class FunctionPolicy final : public Policy {
 public:
  using Fn = std::function<std::string(std::span<const Message>)>;
  explicit FunctionPolicy(Fn fn) : fn_(std::move(fn)) {}
  std::string next_response(std::span<const Message> history) override { return fn_(history); }

 private:
  Fn fn_;
};

/// A person types each assistant response on `in`; input ends at a blank line.
class HumanPolicy final : public Policy {
 public:
  HumanPolicy(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  std::string next_response(std::span<const Message> history) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

/// One-shot dispatch on a spec. Scripted returns script[#assistant messages so far].
std::string next_response(const PolicySpec& spec, std::span<const Message> history);

/// A policy failure during rollout, with the partial trajectory attached.
class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, Trajectory partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// reset, then alternate next_response / step until done, then finalize.
Trajectory rollout(Policy& policy, const Problem& problem, const EnvConfig& env_cfg,
                   const RewardConfig& reward_cfg, const JudgeConfig& judge_cfg);
Trajectory rollout(const PolicySpec& spec, const Problem& problem, const EnvConfig& env_cfg,
                   const RewardConfig& reward_cfg, const JudgeConfig& judge_cfg);

}  // namespace gril

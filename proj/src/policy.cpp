#include "gril/policy.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "gril/errors.hpp"

namespace gril {

namespace {

void check_history(std::span<const Message> history) {
  if (history.empty()) throw ContractError("policy called with an empty history");
  if (history.back().role == Role::Assistant) {
    throw ContractError("policy called when the assistant has the last word");
  }
}

std::size_t assistant_turns(std::span<const Message> history) {
  return static_cast<std::size_t>(std::count_if(
      history.begin(), history.end(), [](const Message& m) { return m.role == Role::Assistant; }));
}

class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<std::string> script) : script_(std::move(script)) {}
  std::string next_response(std::span<const Message> history) override {
    check_history(history);
    std::size_t i = assistant_turns(history);
    if (i >= script_.size()) throw ScriptExhaustedError(script_.size());
    return script_[i];
  }

 private:
  std::vector<std::string> script_;
};

class FixedPolicy final : public Policy {
 public:
  explicit FixedPolicy(std::string_view text) : text_(text) {}
  std::string next_response(std::span<const Message> history) override {
    check_history(history);
    return text_;
  }

 private:
  std::string text_;
};

class RemotePolicy final : public Policy {
 public:
  explicit RemotePolicy(const RemoteEndpoint& ep) : client_(ep) {}
  std::string next_response(std::span<const Message> history) override {
    check_history(history);
    return client_.complete(history);
  }

 private:
  ChatClient client_;
};

}  // namespace

std::vector<std::string> validate_policy_spec(const PolicySpec& spec) {
  std::vector<std::string> errors;
  if (spec.kind == PolicyKind::Scripted && spec.script.empty()) {
    errors.emplace_back("scripted policy needs a non-empty script");
  }
  if (spec.kind == PolicyKind::Remote) {
    if (!spec.endpoint) {
      errors.emplace_back("remote policy needs an endpoint");
    } else {
      for (auto& e : validate_endpoint(*spec.endpoint)) errors.push_back("endpoint." + e);
    }
  }
  return errors;
}

std::string HumanPolicy::next_response(std::span<const Message> history) {
  check_history(history);
  out_ << "\n--- " << to_string(history.back().role) << " ---\n" << history.back().content << "\n";
  out_ << "--- your response (finish with an empty line) ---\n" << std::flush;
  std::string response;
  std::string line;
  while (std::getline(in_, line) && !line.empty()) {
    if (!response.empty()) response += '\n';
    response += line;
  }
  if (response.empty() && !in_) throw std::runtime_error("input closed");
  return response;
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
  if (auto errors = validate_policy_spec(spec); !errors.empty()) throw ValidationError(errors);
  switch (spec.kind) {
    case PolicyKind::Scripted:
      return std::make_unique<ScriptedPolicy>(spec.script);
    case PolicyKind::AlwaysSolve:
      return std::make_unique<FixedPolicy>(kAlwaysSolveText);
    case PolicyKind::AlwaysClarify:
      return std::make_unique<FixedPolicy>(kAlwaysClarifyText);
    case PolicyKind::Remote:
      return std::make_unique<RemotePolicy>(*spec.endpoint);
  }
  throw std::logic_error("unknown policy kind");
}

std::string next_response(const PolicySpec& spec, std::span<const Message> history) {
  return make_policy(spec)->next_response(history);
}

Trajectory rollout(Policy& policy, const Problem& problem, const EnvConfig& env_cfg,
                   const RewardConfig& reward_cfg, const JudgeConfig& judge_cfg) {
  SessionState state = reset(problem, env_cfg);
  while (!state.done) {
    std::string text;
    try {
      text = policy.next_response(state.history);
    } catch (const std::exception& e) {
      throw RolloutError(e.what(), snapshot(state));
    }
    state = step(std::move(state), text, env_cfg, reward_cfg, judge_cfg).state;
  }
  return finalize(state, reward_cfg);
}

Trajectory rollout(const PolicySpec& spec, const Problem& problem, const EnvConfig& env_cfg,
                   const RewardConfig& reward_cfg, const JudgeConfig& judge_cfg) {
  auto policy = make_policy(spec);
  return rollout(*policy, problem, env_cfg, reward_cfg, judge_cfg);
}

}  // namespace gril

#include "gril/settings.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "gril/errors.hpp"

namespace gril {

namespace {

// Reads typed values out of one JSON object, collecting path-qualified errors.
class Section {
 public:
  Section(const Json& j, std::string path, std::vector<std::string>& errors)
      : j_(j), path_(std::move(path)), errors_(errors) {
    if (!j_.is_object()) error(path_, "expected a table");
  }

  bool ok() const { return j_.is_object(); }

  void number(const char* key, double& out) {
    if (auto* v = find(key)) {
      if (v->is_number()) out = v->get<double>();
      else error(at(key), "expected a number");
    }
  }
  void integer(const char* key, int& out) {
    if (auto* v = find(key)) {
      if (v->is_number_integer()) out = v->get<int>();
      else error(at(key), "expected an integer");
    }
  }
  void u64(const char* key, std::uint64_t& out) {
    if (auto* v = find(key)) {
      if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0)) {
        out = v->get<std::uint64_t>();
      } else {
        error(at(key), "expected a non-negative integer");
      }
    }
  }
  void boolean(const char* key, bool& out) {
    if (auto* v = find(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else error(at(key), "expected a boolean");
    }
  }
  void string(const char* key, std::string& out) {
    if (auto* v = find(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else error(at(key), "expected a string");
    }
  }
  void strings(const char* key, std::vector<std::string>& out) {
    if (auto* v = find(key)) {
      if (!v->is_array()) {
        error(at(key), "expected an array of strings");
        return;
      }
      std::vector<std::string> tmp;
      for (const auto& e : *v) {
        if (!e.is_string()) {
          error(at(key), "expected an array of strings");
          return;
        }
        tmp.push_back(e.get<std::string>());
      }
      out = std::move(tmp);
    }
  }
  const Json* table(const char* key) { return find(key); }

  // Reports keys nobody asked for. Call after all reads.
  void reject_unknown() {
    if (!ok()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) error(at(it.key()), "unknown key");
    }
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void error(const std::string& path, const std::string& what) { errors_.push_back(path + ": " + what); }

 private:
  const Json* find(const char* key) {
    seen_.emplace_back(key);
    if (!ok()) return nullptr;
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& j_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::vector<std::string> seen_;
};

void apply_env(EnvConfig& env, const Json& j, std::vector<std::string>& errors) {
  Section s(j, "env", errors);
  s.integer("max_turns", env.max_turns);
  s.boolean("strict_format", env.strict_format);
  std::string condition(to_string(env.condition));
  s.string("condition", condition);
  if (auto c = condition_from_string(condition)) env.condition = *c;
  else s.error(s.at("condition"), "unknown condition '" + condition + "'");
  s.u64("condition_seed", env.condition_seed);
  s.integer("noise_sentences", env.noise_sentences);
  s.strings("distractors", env.distractors);
  s.strings("evasive_pool", env.evasive_pool);
  s.string("prompt_template", env.prompt_template);
  if (const Json* t = s.table("templates")) {
    Section ts(*t, "env.templates", errors);
    if (ts.ok()) {
      for (auto it = t->begin(); it != t->end(); ++it) {
        const auto& keys = required_template_keys();
        if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
          ts.error(ts.at(it.key()), "unknown template");
        } else if (!it->is_string()) {
          ts.error(ts.at(it.key()), "expected a string");
        } else {
          env.feedback_templates[it.key()] = it->get<std::string>();
        }
      }
    }
  }
  s.reject_unknown();
}

void apply_reward(RewardConfig& r, const Json& j, std::vector<std::string>& errors) {
  Section s(j, "reward", errors);
  s.number("r_base", r.r_base);
  s.number("gamma_d", r.gamma_d);
  s.number("r_correct", r.r_correct);
  s.number("lambda", r.lambda);
  s.number("alpha", r.alpha);
  s.number("beta", r.beta);
  s.reject_unknown();
}

void apply_judge(JudgeConfig& c, const Json& j, std::vector<std::string>& errors) {
  Section s(j, "judge", errors);
  s.number("numeric_tolerance", c.numeric_tolerance);
  s.boolean("case_sensitive", c.case_sensitive);
  s.reject_unknown();
}

void apply_endpoint(RemoteEndpoint& ep, const Json& j, std::vector<std::string>& errors) {
  Section s(j, "endpoint", errors);
  s.string("base_url", ep.base_url);
  s.string("model", ep.model_name);
  s.string("api_key_env", ep.api_key_env);
  s.number("temperature", ep.temperature);
  s.integer("max_new_tokens", ep.max_new_tokens);
  int timeout_ms = static_cast<int>(ep.timeout.count());
  s.integer("timeout_ms", timeout_ms);
  ep.timeout = std::chrono::milliseconds(timeout_ms);
  s.integer("max_retries", ep.max_retries);
  int initial_ms = static_cast<int>(ep.retry.initial_delay.count());
  s.integer("retry_initial_ms", initial_ms);
  ep.retry.initial_delay = std::chrono::milliseconds(initial_ms);
  s.reject_unknown();
}

void apply_dataset(DatasetSettings& d, const Json& j, std::vector<std::string>& errors) {
  Section s(j, "dataset", errors);
  s.number("fraction", d.fraction);
  s.integer("retry_masks", d.retry_masks);
  s.number("audit_fraction", d.audit_fraction);
  s.string("oracle", d.oracle);
  s.reject_unknown();
}

void apply_service(ServiceSettings& sv, const Json& j, std::vector<std::string>& errors) {
  Section s(j, "service", errors);
  s.string("addr", sv.addr);
  int ttl = static_cast<int>(sv.ttl.count());
  s.integer("ttl_s", ttl);
  sv.ttl = std::chrono::seconds(ttl);
  s.string("log", sv.log_path);
  s.string("dataset", sv.dataset_path);
  s.reject_unknown();
}

void prefix_all(std::vector<std::string>& out, const std::string& prefix, const std::vector<std::string>& in) {
  for (const auto& e : in) out.push_back(prefix + e);
}

}  // namespace

std::vector<std::string> apply_settings_json(Settings& st, const Json& j) {
  std::vector<std::string> errors;
  Section top(j, "", errors);
  if (!top.ok()) return errors;
  top.u64("seed", st.seed);
  top.integer("jobs", st.jobs);
  if (const Json* t = top.table("env")) apply_env(st.env, *t, errors);
  if (const Json* t = top.table("reward")) apply_reward(st.reward, *t, errors);
  if (const Json* t = top.table("judge")) apply_judge(st.judge, *t, errors);
  if (const Json* t = top.table("endpoint")) apply_endpoint(st.endpoint, *t, errors);
  if (const Json* t = top.table("dataset")) apply_dataset(st.dataset, *t, errors);
  if (const Json* t = top.table("service")) apply_service(st.service, *t, errors);
  top.reject_unknown();
  return errors;
}

std::vector<std::string> apply_episode_overrides(EnvConfig& env, RewardConfig& reward,
                                                 JudgeConfig& judge, const Json& j) {
  std::vector<std::string> errors;
  Section top(j, "overrides", errors);
  if (!top.ok()) return errors;
  if (const Json* t = top.table("env")) apply_env(env, *t, errors);
  if (const Json* t = top.table("reward")) apply_reward(reward, *t, errors);
  if (const Json* t = top.table("judge")) apply_judge(judge, *t, errors);
  top.reject_unknown();
  if (errors.empty()) {
    prefix_all(errors, "env: ", validate_env_config(env));
    prefix_all(errors, "reward: ", validate_reward_config(reward));
    prefix_all(errors, "judge: ", validate_judge_config(judge));
  }
  return errors;
}

std::vector<std::string> validate_settings(const Settings& s) {
  std::vector<std::string> errors;
  prefix_all(errors, "env: ", validate_env_config(s.env));
  prefix_all(errors, "reward: ", validate_reward_config(s.reward));
  prefix_all(errors, "judge: ", validate_judge_config(s.judge));
  if (!(s.dataset.fraction >= 0.0 && s.dataset.fraction <= 1.0)) {
    errors.emplace_back("dataset.fraction: must lie in [0,1]");
  }
  if (s.dataset.retry_masks < 0) errors.emplace_back("dataset.retry_masks: must be non-negative");
  if (!(s.dataset.audit_fraction >= 0.0 && s.dataset.audit_fraction <= 1.0)) {
    errors.emplace_back("dataset.audit_fraction: must lie in [0,1]");
  }
  if (s.dataset.oracle != "permissive" && s.dataset.oracle != "digit-leak" && s.dataset.oracle != "chat") {
    errors.emplace_back("dataset.oracle: must be permissive, digit-leak or chat");
  }
  if (s.jobs < 1) errors.emplace_back("jobs: must be at least 1");
  if (s.service.ttl.count() < 0) errors.emplace_back("service.ttl_s: must be non-negative");
  return errors;
}

Json parse_toml(std::string_view text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at line " << e.source().begin.line;
    throw ValidationError({os.str()});
  }
  std::ostringstream os;
  os << toml::json_formatter{tbl};
  return Json::parse(os.str());
}

Json read_toml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_toml(buf.str());
}

Settings load_settings(const std::filesystem::path& path) {
  Settings s;
  if (!path.empty()) {
    auto errors = apply_settings_json(s, read_toml_file(path));
    if (!errors.empty()) throw ValidationError(std::move(errors));
  }
  if (auto errors = validate_settings(s); !errors.empty()) throw ValidationError(std::move(errors));
  return s;
}

}  // namespace gril

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gril/chat_client.hpp"
#include "gril/core.hpp"
#include "gril/judge.hpp"
#include "gril/serialize.hpp"

namespace gril {

struct DatasetSettings {
  double fraction = 0.5;
  int retry_masks = 0;
  double audit_fraction = 0.02;
  std::string oracle = "digit-leak";  // permissive | digit-leak | chat
};

struct ServiceSettings {
  std::string addr = "127.0.0.1:8080";
  std::chrono::seconds ttl{3600};
  std::string log_path = "trajectories.jsonl";
  std::string dataset_path;
};

/// Everything a CLI run or the service can be configured with. The defaults
/// are the published training setting.
struct Settings {
  EnvConfig env;
  RewardConfig reward;
  JudgeConfig judge;
  RemoteEndpoint endpoint;
  DatasetSettings dataset;
  ServiceSettings service;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Merge a JSON object shaped like the config file into `s`. Returns one
/// message per offending key, each prefixed with its dotted path. Unknown
/// keys are errors.
std::vector<std::string> apply_settings_json(Settings& s, const Json& j);

/// Episode-level overrides only (`env`, `reward`, `judge`), as accepted per
/// request by the service.
std::vector<std::string> apply_episode_overrides(EnvConfig& env, RewardConfig& reward,
                                                 JudgeConfig& judge, const Json& j);

/// Validates env/reward/judge/dataset sections with dotted paths.
std::vector<std::string> validate_settings(const Settings& s);

/// Parse a TOML config file into JSON form. Throws ValidationError on syntax errors.
Json read_toml_file(const std::filesystem::path& path);
Json parse_toml(std::string_view text);

/// Defaults, then the file (if given), validated. Throws ValidationError.
Settings load_settings(const std::filesystem::path& path);

}  // namespace gril

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gril/core.hpp"

// Canonical JSON forms of the core types. Field order is fixed so that
// serialized trajectories are byte-comparable across runs and transports.
namespace gril {

using Json = nlohmann::ordered_json;

Json to_json(const Problem& p);
Json to_json(const Message& m);
Json to_json(const RewardBreakdown& r);
Json to_json(const TurnRecord& t);
Json to_json(const Trajectory& t);

// Parsers throw ValidationError naming the offending field path.
Problem problem_from_json(const Json& j);
Message message_from_json(const Json& j);
RewardBreakdown reward_from_json(const Json& j);
TurnRecord turn_record_from_json(const Json& j);
Trajectory trajectory_from_json(const Json& j);

/// Single-line dump used for newline-delimited files and wire bodies.
std::string dump_line(const Json& j);

std::vector<Problem> read_problems(const std::filesystem::path& path);
std::vector<Problem> read_problems(std::istream& in);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);
std::vector<Trajectory> read_trajectories(std::istream& in);

void write_problems(std::ostream& out, const std::vector<Problem>& problems);
void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories);

}  // namespace gril

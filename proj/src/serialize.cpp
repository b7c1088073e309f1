#include "gril/serialize.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "gril/errors.hpp"
#include "gril/text.hpp"

namespace gril {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError({path + ": " + what});
}

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing");
  return *it;
}

std::string get_string(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> get_opt_string(const Json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) fail(path + "." + key, "expected a string or null");
  return it->get<std::string>();
}

double get_number(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const Json& j, const char* key, const std::string& path) {
  const Json& v = field(j, key, path);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

template <typename E, typename Parse>
E get_enum(const Json& j, const char* key, const std::string& path, Parse parse) {
  std::string s = get_string(j, key, path);
  auto v = parse(s);
  if (!v) fail(path + "." + key, "unknown value '" + s + "'");
  return *v;
}

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

}  // namespace

Json to_json(const Problem& p) {
  Json j;
  j["id"] = p.id;
  j["kind"] = to_string(p.kind);
  j["question"] = p.question;
  j["missing_premise"] = optional_string(p.missing_premise);
  j["gold_answer"] = p.gold_answer;
  j["source"] = optional_string(p.source);
  return j;
}

Json to_json(const Message& m) {
  Json j;
  j["role"] = to_string(m.role);
  j["content"] = m.content;
  j["turn"] = m.turn;
  return j;
}

Json to_json(const RewardBreakdown& r) {
  Json j;
  j["detect"] = r.detect;
  j["solve"] = r.solve;
  j["comp"] = r.comp;
  j["n_prior"] = r.n_prior;
  j["total"] = r.total;
  return j;
}

Json to_json(const TurnRecord& t) {
  Json j;
  j["turn"] = t.turn;
  j["assistant"] = to_json(t.assistant);
  j["action"] = to_string(t.action);
  j["feedback"] = t.feedback ? to_json(*t.feedback) : Json(nullptr);
  j["turn_reward"] = t.turn_reward;
  j["event"] = to_string(t.event);
  j["audit"] = t.audit;
  return j;
}

Json to_json(const Trajectory& t) {
  Json j;
  j["problem_id"] = t.problem_id;
  j["kind"] = to_string(t.kind);
  j["condition"] = to_string(t.condition);
  Json turns = Json::array();
  for (const auto& r : t.turns) turns.push_back(to_json(r));
  j["turns"] = std::move(turns);
  j["outcome"] = t.outcome ? Json(to_string(*t.outcome)) : Json(nullptr);
  j["reward"] = t.reward ? to_json(*t.reward) : Json(nullptr);
  j["detected"] = t.detected;
  j["detection_turn"] = t.detection_turn ? Json(*t.detection_turn) : Json(nullptr);
  j["unnecessary_clarifications"] = t.unnecessary_clarifications;
  j["interrupted"] = t.interrupted;
  return j;
}

Problem problem_from_json(const Json& j) {
  const std::string path = "problem";
  Problem p;
  // Corpus files may omit ids; the dataset builder assigns them.
  p.id = get_opt_string(j, "id", path).value_or("");
  p.kind = get_enum<ProblemKind>(j, "kind", path, problem_kind_from_string);
  p.question = get_string(j, "question", path);
  p.missing_premise = get_opt_string(j, "missing_premise", path);
  p.gold_answer = get_string(j, "gold_answer", path);
  p.source = get_opt_string(j, "source", path);
  if (auto errors = validate_problem(p); !errors.empty()) {
    for (auto& e : errors) e = path + ": " + e;
    throw ValidationError(std::move(errors));
  }
  return p;
}

Message message_from_json(const Json& j) {
  const std::string path = "message";
  Message m;
  m.role = get_enum<Role>(j, "role", path, role_from_string);
  m.content = get_string(j, "content", path);
  m.turn = get_int(j, "turn", path);
  return m;
}

RewardBreakdown reward_from_json(const Json& j) {
  const std::string path = "reward";
  RewardBreakdown r;
  r.detect = get_number(j, "detect", path);
  r.solve = get_number(j, "solve", path);
  r.comp = get_number(j, "comp", path);
  r.n_prior = get_int(j, "n_prior", path);
  r.total = get_number(j, "total", path);
  return r;
}

TurnRecord turn_record_from_json(const Json& j) {
  const std::string path = "turn";
  TurnRecord t;
  t.turn = get_int(j, "turn", path);
  t.assistant = message_from_json(field(j, "assistant", path));
  t.action = get_enum<ActionKind>(j, "action", path, action_kind_from_string);
  const Json& fb = field(j, "feedback", path);
  if (!fb.is_null()) t.feedback = message_from_json(fb);
  t.turn_reward = get_number(j, "turn_reward", path);
  t.event = get_enum<TurnEvent>(j, "event", path, turn_event_from_string);
  auto it = j.find("audit");
  if (it != j.end()) {
    if (!it->is_array()) fail(path + ".audit", "expected an array");
    for (const auto& a : *it) {
      if (!a.is_string()) fail(path + ".audit", "expected strings");
      t.audit.push_back(a.get<std::string>());
    }
  }
  return t;
}

Trajectory trajectory_from_json(const Json& j) {
  const std::string path = "trajectory";
  Trajectory t;
  t.problem_id = get_string(j, "problem_id", path);
  t.kind = get_enum<ProblemKind>(j, "kind", path, problem_kind_from_string);
  t.condition = get_enum<FeedbackCondition>(j, "condition", path, condition_from_string);
  const Json& turns = field(j, "turns", path);
  if (!turns.is_array()) fail(path + ".turns", "expected an array");
  for (const auto& r : turns) t.turns.push_back(turn_record_from_json(r));
  const Json& outcome = field(j, "outcome", path);
  if (!outcome.is_null()) t.outcome = get_enum<Outcome>(j, "outcome", path, outcome_from_string);
  const Json& reward = field(j, "reward", path);
  if (!reward.is_null()) t.reward = reward_from_json(reward);
  t.detected = get_bool(j, "detected", path);
  const Json& dt = field(j, "detection_turn", path);
  if (!dt.is_null()) t.detection_turn = get_int(j, "detection_turn", path);
  t.unnecessary_clarifications = get_int(j, "unnecessary_clarifications", path);
  t.interrupted = get_bool(j, "interrupted", path);
  return t;
}

std::string dump_line(const Json& j) { return j.dump(); }

namespace {

template <typename T, typename Parse>
std::vector<T> read_lines(std::istream& in, Parse parse) {
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError({"line " + std::to_string(lineno) + ": " + e.what()});
    }
    try {
      out.push_back(parse(j));
    } catch (const ValidationError& e) {
      throw ValidationError({"line " + std::to_string(lineno) + ": " + join_violations(e.violations())});
    }
  }
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<Problem> read_problems(std::istream& in) {
  return read_lines<Problem>(in, problem_from_json);
}

std::vector<Problem> read_problems(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_problems(in);
}

std::vector<Trajectory> read_trajectories(std::istream& in) {
  return read_lines<Trajectory>(in, trajectory_from_json);
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return read_trajectories(in);
}

void write_problems(std::ostream& out, const std::vector<Problem>& problems) {
  for (const auto& p : problems) out << dump_line(to_json(p)) << '\n';
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajectories) {
  for (const auto& t : trajectories) out << dump_line(to_json(t)) << '\n';
}

}  // namespace gril

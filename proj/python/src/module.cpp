#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "gril/datagen.hpp"
#include "gril/env.hpp"
#include "gril/errors.hpp"
#include "gril/judge.hpp"
#include "gril/metrics.hpp"
#include "gril/parser.hpp"
#include "gril/reward.hpp"
#include "gril/serialize.hpp"
#include "gril/settings.hpp"

namespace py = pybind11;
using namespace py::literals;

namespace {

using gril::Json;

// Values cross the boundary as plain dicts and lists, in the same shape as
// the JSONL files.
py::object to_py(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json from_py(const py::handle& obj) {
  return Json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::vector<gril::Problem> problems_from_py(const py::list& items) {
  std::vector<gril::Problem> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(gril::problem_from_json(from_py(item)));
  return out;
}

std::vector<gril::Trajectory> trajectories_from_py(const py::list& items) {
  std::vector<gril::Trajectory> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(gril::trajectory_from_json(from_py(item)));
  return out;
}

struct EpisodeConfigs {
  gril::EnvConfig env;
  gril::RewardConfig reward;
  gril::JudgeConfig judge;
};

EpisodeConfigs configs_from(const py::object& overrides) {
  EpisodeConfigs c;
  if (overrides.is_none()) return c;
  auto errors = gril::apply_episode_overrides(c.env, c.reward, c.judge, from_py(overrides));
  if (errors.empty()) {
    for (auto& e : gril::validate_env_config(c.env)) errors.push_back("env." + e);
    for (auto& e : gril::validate_reward_config(c.reward)) errors.push_back("reward." + e);
    for (auto& e : gril::validate_judge_config(c.judge)) errors.push_back("judge." + e);
  }
  if (!errors.empty()) throw gril::ValidationError(std::move(errors));
  return c;
}

Json parsed_json(const gril::ParsedResponse& p) {
  auto opt = [](const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); };
  return Json{{"think", opt(p.think)},
              {"answer", opt(p.answer)},
              {"well_formed", p.well_formed},
              {"duplicate_tags", p.duplicate_tags}};
}

Json step_json(const gril::StepResult& r, int turn) {
  return Json{{"turn", turn},
              {"feedback", r.feedback ? gril::to_json(*r.feedback) : Json(nullptr)},
              {"event", std::string(gril::to_string(r.event))},
              {"action", std::string(gril::to_string(r.action))},
              {"turn_reward", r.turn_reward},
              {"done", r.done},
              {"outcome", r.outcome_if_done ? Json(std::string(gril::to_string(*r.outcome_if_done)))
                                            : Json(nullptr)}};
}

class PyEpisode {
 public:
  PyEpisode(const py::dict& problem, const py::object& overrides)
      : PyEpisode(gril::problem_from_json(from_py(problem)), configs_from(overrides)) {}

  py::object step(const std::string& text) {
    const gril::StepResult& r = episode_.step(text);
    return to_py(step_json(r, episode_.state().turn));
  }

  py::object messages() const {
    Json out = Json::array();
    for (const auto& m : episode_.history()) out.push_back(gril::to_json(m));
    return to_py(out);
  }

  py::object trajectory() const {
    return to_py(gril::to_json(episode_.done() ? episode_.finalize() : episode_.snapshot()));
  }

  bool done() const { return episode_.done(); }
  int turn() const { return episode_.state().turn; }
  int max_turns() const { return episode_.env_config().max_turns; }

 private:
  PyEpisode(gril::Problem p, EpisodeConfigs c)
      : episode_(std::move(p), std::move(c.env), c.reward, c.judge) {}

  gril::Episode episode_;
};

gril::SolvabilityOracle& named_oracle(const std::string& name) {
  static gril::PermissiveOracle permissive;
  static gril::DigitLeakOracle digit_leak;
  if (name == "permissive") return permissive;
  if (name == "digit-leak") return digit_leak;
  throw gril::ValidationError({"oracle: expected permissive or digit-leak, got '" + name + "'"});
}

}  // namespace

PYBIND11_MODULE(_gril, m) {
  m.doc() = "Missing-premise multi-turn environment";

  py::register_exception<gril::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<gril::ContractError>(m, "ContractError", PyExc_RuntimeError);
  py::register_exception<gril::EmptyInputError>(m, "EmptyInputError", PyExc_ValueError);
  py::register_exception<gril::ShortfallError>(m, "ShortfallError", PyExc_RuntimeError);

  m.def(
      "parse_response",
      [](const std::string& raw, bool strict) { return to_py(parsed_json(gril::parse_response(raw, strict))); },
      "raw"_a, "strict"_a = false);
  m.def(
      "classify_action",
      [](const std::string& raw, bool strict) {
        return std::string(gril::to_string(gril::classify_action(gril::parse_response(raw, strict))));
      },
      "raw"_a, "strict"_a = false);
  m.def(
      "extract_final_answer",
      [](const std::string& raw) { return gril::extract_final_answer(gril::parse_response(raw, false)); },
      "raw"_a);
  m.def("normalize_answer", [](const std::string& a) { return gril::normalize_answer(a); }, "answer"_a);
  m.def(
      "check_answer",
      [](const std::string& candidate, const std::string& gold, double tolerance, bool case_sensitive) {
        gril::JudgeConfig cfg{tolerance, case_sensitive};
        return gril::check_answer(candidate, gold, cfg);
      },
      "candidate"_a, "gold"_a, "tolerance"_a = 1e-6, "case_sensitive"_a = false);

  m.def(
      "trajectory_reward",
      [](const std::string& kind, bool detected, int n_prior, bool solved_correct, bool unnecessary_clarified,
         const py::object& reward) {
        auto k = gril::problem_kind_from_string(kind);
        if (!k) throw gril::ValidationError({"kind: expected Incomplete or Complete, got '" + kind + "'"});
        py::object overrides = py::none();
        if (!reward.is_none()) overrides = py::dict("reward"_a = reward);
        const auto cfg = configs_from(overrides).reward;
        return to_py(gril::to_json(
            gril::trajectory_reward(*k, detected, n_prior, solved_correct, unnecessary_clarified, cfg)));
      },
      "kind"_a, "detected"_a, "n_prior"_a, "solved_correct"_a, "unnecessary_clarified"_a, "reward"_a = py::none());

  py::class_<PyEpisode>(m, "Episode")
      .def(py::init<const py::dict&, const py::object&>(), "problem"_a, "overrides"_a = py::none())
      .def("step", &PyEpisode::step, "text"_a)
      .def("trajectory", &PyEpisode::trajectory)
      .def_property_readonly("messages", &PyEpisode::messages)
      .def_property_readonly("done", &PyEpisode::done)
      .def_property_readonly("turn", &PyEpisode::turn)
      .def_property_readonly("max_turns", &PyEpisode::max_turns);

  m.def(
      "evaluate",
      [](const py::list& trajectories, int max_turns) {
        auto ts = trajectories_from_py(trajectories);
        return to_py(gril::to_json(gril::evaluate(ts, gril::whitespace_tokenizer(), max_turns)));
      },
      "trajectories"_a, "max_turns"_a = 4);
  m.def(
      "detection_classification",
      [](const py::list& trajectories) {
        auto ts = trajectories_from_py(trajectories);
        return to_py(gril::to_json(gril::detection_classification(gril::turn1_actions(ts))));
      },
      "trajectories"_a);
  m.def(
      "forced_feedback_report",
      [](const py::list& trajectories) {
        auto ts = trajectories_from_py(trajectories);
        return to_py(gril::to_json(gril::forced_feedback_report(ts)));
      },
      "trajectories"_a);
  m.def(
      "gap_ratio",
      [](const std::vector<std::string>& texts, std::optional<std::vector<std::string>> lexicon) {
        const auto lex = lexicon ? *lexicon : gril::default_uncertainty_lexicon();
        return to_py(gril::to_json(gril::gap_ratio(texts, lex, gril::whitespace_tokenizer())));
      },
      "assistant_texts"_a, "lexicon"_a = py::none());
  m.def("default_uncertainty_lexicon", &gril::default_uncertainty_lexicon);

  m.def("segment_sentences", [](const std::string& text) { return gril::segment_sentences(text); }, "text"_a);
  m.def(
      "mask_problem",
      [](const py::dict& problem, std::uint64_t seed) -> py::object {
        auto masked = gril::mask_problem(gril::problem_from_json(from_py(problem)), seed);
        if (!masked) return py::none();
        return to_py(Json{{"masked_question", masked->masked_question},
                          {"masked_sentence", masked->masked_sentence},
                          {"sentence_index", masked->sentence_index}});
      },
      "problem"_a, "seed"_a);
  m.def(
      "build_dataset",
      [](const py::list& corpus, double fraction, std::uint64_t seed, const std::string& oracle, int jobs,
         int retry_masks) {
        auto problems = problems_from_py(corpus);
        gril::BuildOptions opts;
        opts.incomplete_fraction = fraction;
        opts.seed = seed;
        opts.jobs = jobs;
        opts.retry_masks = retry_masks;
        if (auto errors = gril::validate_build_options(opts); !errors.empty()) {
          throw gril::ValidationError(std::move(errors));
        }
        gril::DatasetBuild build = [&] {
          py::gil_scoped_release release;
          return gril::build_dataset(problems, named_oracle(oracle), opts);
        }();
        Json items = Json::array();
        for (const auto& p : build.problems) items.push_back(gril::to_json(p));
        const auto& s = build.summary;
        Json summary{{"complete", s.complete},           {"incomplete", s.incomplete},
                     {"dropped_redundant", s.dropped_redundant}, {"no_candidate", s.no_candidate},
                     {"leaked", s.leaked},               {"oracle_calls", s.oracle_calls}};
        return py::make_tuple(to_py(items), to_py(summary));
      },
      "corpus"_a, "fraction"_a = 0.5, "seed"_a = 0, "oracle"_a = "digit-leak", "jobs"_a = 1, "retry_masks"_a = 0);
}

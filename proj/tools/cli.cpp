#include "gril/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gril/datagen.hpp"
#include "gril/errors.hpp"
#include "gril/metrics.hpp"
#include "gril/policy.hpp"
#include "gril/serialize.hpp"
#include "gril/service.hpp"
#include "gril/settings.hpp"

namespace gril {

namespace {

// Flags shared by every subcommand. Values only apply when given, so the
// precedence is flag > config file > compiled-in default.
struct CommonFlags {
  std::string config;
  std::uint64_t seed = 0;
  int max_turns = 0;
  double alpha = 0, beta = 0, gamma_d = 0, lambda = 0, fraction = 0;
  std::string endpoint;
  int jobs = 1;
  std::string out;

  CLI::Option* o_seed = nullptr;
  CLI::Option* o_max_turns = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_beta = nullptr;
  CLI::Option* o_gamma_d = nullptr;
  CLI::Option* o_lambda = nullptr;
  CLI::Option* o_fraction = nullptr;
  CLI::Option* o_endpoint = nullptr;
  CLI::Option* o_jobs = nullptr;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "TOML config file")->check(CLI::ExistingFile);
    o_seed = app.add_option("--seed", seed, "Master seed");
    o_max_turns = app.add_option("--max-turns", max_turns, "Turn limit per episode");
    o_alpha = app.add_option("--alpha", alpha, "Detection weight");
    o_beta = app.add_option("--beta", beta, "Solution weight");
    o_gamma_d = app.add_option("--gamma-d", gamma_d, "Detection decay");
    o_lambda = app.add_option("--lambda", lambda, "Unnecessary-clarification penalty");
    o_fraction = app.add_option("--fraction", fraction, "Incomplete fraction");
    o_endpoint = app.add_option("--endpoint", endpoint, "Chat endpoint base URL");
    o_jobs = app.add_option("--jobs", jobs, "Concurrent workers");
    app.add_option("--out", out, "Output file");
  }

  Settings resolve() const {
    Settings s;
    if (!config.empty()) {
      auto errors = apply_settings_json(s, read_toml_file(config));
      if (!errors.empty()) throw ValidationError(std::move(errors));
    }
    if (o_seed->count()) {
      s.seed = seed;
      s.env.condition_seed = seed;
    }
    if (o_max_turns->count()) s.env.max_turns = max_turns;
    if (o_alpha->count()) s.reward.alpha = alpha;
    if (o_beta->count()) s.reward.beta = beta;
    if (o_gamma_d->count()) s.reward.gamma_d = gamma_d;
    if (o_lambda->count()) s.reward.lambda = lambda;
    if (o_fraction->count()) s.dataset.fraction = fraction;
    if (o_endpoint->count()) s.endpoint.base_url = endpoint;
    if (o_jobs->count()) s.jobs = jobs;
    if (auto errors = validate_settings(s); !errors.empty()) throw ValidationError(std::move(errors));
    return s;
  }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

std::string fmt3(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << v;
  return os.str();
}

// ---- dataset-build ---------------------------------------------------------

struct DatasetBuildArgs {
  std::string corpus;
  std::string oracle;
  int retry_masks = -1;
  std::string audit;
};

int cmd_dataset_build(const CommonFlags& flags, const DatasetBuildArgs& a, std::ostream& out) {
  Settings s = flags.resolve();
  if (!a.oracle.empty()) s.dataset.oracle = a.oracle;
  if (a.retry_masks >= 0) s.dataset.retry_masks = a.retry_masks;
  if (auto errors = validate_settings(s); !errors.empty()) throw ValidationError(std::move(errors));
  if (flags.out.empty()) throw UsageError("dataset-build requires --out");

  std::vector<Problem> corpus = read_problems(a.corpus);

  std::unique_ptr<SolvabilityOracle> oracle;
  if (s.dataset.oracle == "permissive") oracle = std::make_unique<PermissiveOracle>();
  else if (s.dataset.oracle == "digit-leak") oracle = std::make_unique<DigitLeakOracle>();
  else oracle = std::make_unique<ChatOracle>(s.endpoint);

  BuildOptions opts;
  opts.incomplete_fraction = s.dataset.fraction;
  opts.seed = s.seed;
  opts.retry_masks = s.dataset.retry_masks;
  opts.jobs = s.jobs;
  opts.default_source = std::filesystem::path(a.corpus).stem().string();

  DatasetBuild build = build_dataset(corpus, *oracle, opts);
  {
    auto f = open_out(flags.out);
    write_problems(f, build.problems);
  }
  if (!a.audit.empty()) {
    auto f = open_out(a.audit);
    write_audit_file(f, audit_sample(build.problems, s.dataset.audit_fraction, s.seed));
  }
  const auto& sm = build.summary;
  out << "incomplete/complete: " << sm.incomplete << "/" << sm.complete << "\n"
      << "dropped_redundant: " << sm.dropped_redundant << "\n"
      << "no_candidate: " << sm.no_candidate << "\n"
      << "leaked: " << sm.leaked << "\n"
      << "oracle: " << oracle->name() << " (" << sm.oracle_calls << " calls)\n";
  return kExitOk;
}

// ---- rollout ---------------------------------------------------------------

struct RolloutArgs {
  std::string dataset;
  std::string policy = "always-clarify";
  std::string condition;
  bool human = false;
};

// Script files hold either one array of responses used for every problem, or
// an object mapping problem id to its own array.
struct ScriptBook {
  std::vector<std::string> shared;
  std::map<std::string, std::vector<std::string>> per_problem;
  bool keyed = false;

  const std::vector<std::string>& for_problem(const std::string& id) const {
    if (!keyed) return shared;
    auto it = per_problem.find(id);
    if (it == per_problem.end()) throw std::runtime_error("no script for problem " + id);
    return it->second;
  }
};

ScriptBook read_script(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    throw ValidationError({path + ": " + e.what()});
  }
  auto strings = [&](const Json& a, const std::string& where) {
    if (!a.is_array()) throw ValidationError({where + ": expected an array of strings"});
    std::vector<std::string> v;
    for (const auto& e : a) {
      if (!e.is_string()) throw ValidationError({where + ": expected an array of strings"});
      v.push_back(e.get<std::string>());
    }
    return v;
  };
  ScriptBook book;
  if (j.is_object()) {
    book.keyed = true;
    for (auto it = j.begin(); it != j.end(); ++it) book.per_problem[it.key()] = strings(*it, path + ": " + it.key());
  } else {
    book.shared = strings(j, path);
  }
  return book;
}

int cmd_rollout(const CommonFlags& flags, const RolloutArgs& a, std::istream& in, std::ostream& out,
                std::ostream& err) {
  Settings s = flags.resolve();
  if (!a.condition.empty()) {
    auto c = condition_from_string(a.condition);
    if (!c) throw UsageError("unknown condition '" + a.condition + "'");
    s.env.condition = *c;
  }
  if (flags.out.empty()) throw UsageError("rollout requires --out");
  if (a.human && s.jobs > 1) throw UsageError("--human runs one episode at a time; drop --jobs");

  PolicySpec spec;
  std::optional<ScriptBook> book;
  if (!a.human) {
    if (a.policy == "always-clarify") {
      spec.kind = PolicyKind::AlwaysClarify;
    } else if (a.policy == "always-solve") {
      spec.kind = PolicyKind::AlwaysSolve;
    } else if (a.policy == "remote") {
      spec.kind = PolicyKind::Remote;
      spec.endpoint = s.endpoint;
    } else if (a.policy.rfind("scripted:", 0) == 0) {
      spec.kind = PolicyKind::Scripted;
      book = read_script(a.policy.substr(9));
    } else {
      throw UsageError("unknown policy '" + a.policy + "' (always-clarify, always-solve, scripted:PATH, remote)");
    }
    if (!book) {
      if (auto errors = validate_policy_spec(spec); !errors.empty()) throw ValidationError(std::move(errors));
    }
  }

  std::vector<Problem> problems = read_problems(a.dataset);
  if (problems.empty()) throw EmptyInputError("dataset " + a.dataset + " is empty");

  struct Result {
    std::optional<Trajectory> trajectory;
    std::string error;
  };
  auto run_one = [&](const Problem& p) -> Result {
    try {
      if (a.human) {
        HumanPolicy policy(in, out);
        return {rollout(policy, p, s.env, s.reward, s.judge), {}};
      }
      PolicySpec local = spec;
      if (book) local.script = book->for_problem(p.id);
      return {rollout(local, p, s.env, s.reward, s.judge), {}};
    } catch (const std::exception& e) {
      return {std::nullopt, p.id + ": " + e.what()};
    }
  };

  std::vector<Result> results(problems.size());
  const std::size_t jobs = static_cast<std::size_t>(std::max(1, s.jobs));
  for (std::size_t start = 0; start < problems.size(); start += jobs) {
    const std::size_t stop = std::min(problems.size(), start + jobs);
    if (jobs == 1) {
      results[start] = run_one(problems[start]);
      continue;
    }
    std::vector<std::future<Result>> batch;
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(std::launch::async, run_one, std::cref(problems[i])));
    }
    for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
  }

  std::vector<Trajectory> trajectories;
  int errors = 0;
  for (auto& r : results) {
    if (r.trajectory) {
      trajectories.push_back(std::move(*r.trajectory));
    } else {
      ++errors;
      err << "episode failed: " << r.error << "\n";
    }
  }
  if (jobs > 1) {
    std::stable_sort(trajectories.begin(), trajectories.end(),
                     [](const Trajectory& x, const Trajectory& y) { return x.problem_id < y.problem_id; });
  }
  {
    auto f = open_out(flags.out);
    write_trajectories(f, trajectories);
  }

  out << "episodes: " << trajectories.size() << "/" << problems.size() << "\n";
  if (!trajectories.empty()) {
    EvalReport r = evaluate(trajectories, whitespace_tokenizer(), s.env.max_turns);
    out << "SR: " << fmt3(r.success_rate) << "\n";
    if (r.n_incomplete > 0) out << "PD: " << fmt3(r.premise_detection) << "\n";
  }
  return errors == 0 ? kExitOk : kExitDomainError;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string log;
  std::string mode = "standard";
  std::string lexicon;
};

std::vector<std::string> read_lexicon(const std::string& path) {
  if (path.empty()) return default_uncertainty_lexicon();
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(f, line)) {
    if (!line.empty()) phrases.push_back(line);
  }
  if (phrases.empty()) throw EmptyInputError("lexicon " + path + " is empty");
  return phrases;
}

int cmd_eval(const CommonFlags& flags, const EvalArgs& a, std::ostream& out) {
  Settings s = flags.resolve();
  std::vector<Trajectory> trajs = read_trajectories(a.log);
  if (trajs.empty()) throw EmptyInputError("trajectory log " + a.log + " is empty");

  const Tokenizer tok = whitespace_tokenizer();
  ReportProvenance prov;
  prov.tokenizer = tok.name;
  prov.seeds = {{"seed", s.seed}};

  Json report;
  std::string table;
  if (a.mode == "standard") {
    EvalReport r = evaluate(trajs, tok, s.env.max_turns);
    report = to_json(r);
    table = render_table(r);
  } else if (a.mode == "forced-feedback") {
    for (const auto& t : trajs) {
      if (t.condition != FeedbackCondition::ForcedFeedback || t.kind != ProblemKind::Incomplete) {
        throw ValidationError({"forced-feedback mode needs Incomplete trajectories run under the forced-feedback "
                               "condition; " + t.problem_id + " is " + std::string(to_string(t.kind)) + "/" +
                               std::string(to_string(t.condition))});
      }
    }
    ForcedFeedbackReport r = forced_feedback_report(trajs);
    report = to_json(r);
    table = render_table(r);
  } else if (a.mode == "robustness") {
    const FeedbackCondition c = trajs.front().condition;
    for (const auto& t : trajs) {
      if (t.condition != c) {
        throw ValidationError({"robustness mode needs one condition per log; found " +
                               std::string(to_string(c)) + " and " + std::string(to_string(t.condition))});
      }
    }
    RobustnessReport r = robustness_report(trajs, c);
    report = to_json(r);
    table = render_table(r);
  } else if (a.mode == "classification") {
    DetectionClassificationReport r = detection_classification(turn1_actions(trajs));
    report = to_json(r);
    table = render_table(r);
  } else if (a.mode == "gap") {
    const auto lexicon = read_lexicon(a.lexicon);
    prov.lexicon_hash = lexicon_hash(lexicon);
    Json episodes = Json::array();
    double sum = 0.0;
    std::ostringstream os;
    os << "| problem | tokens | suspect | gap_ratio |\n|---|---|---|---|\n";
    for (const auto& t : trajs) {
      GapMeasurement g = gap_ratio(t, lexicon, tok);
      Json e = to_json(g);
      e["problem_id"] = t.problem_id;
      episodes.push_back(std::move(e));
      sum += g.gap_ratio;
      os << "| " << t.problem_id << " | " << g.total_tokens << " | "
         << (g.suspect_position ? std::to_string(*g.suspect_position) : "-") << " | " << fmt3(g.gap_ratio)
         << " |\n";
    }
    const double mean = sum / static_cast<double>(trajs.size());
    os << "mean gap_ratio: " << fmt3(mean) << "\n";
    report = Json{{"episodes", std::move(episodes)}, {"mean_gap_ratio", mean}};
    table = os.str();
  } else {
    throw UsageError("unknown mode '" + a.mode + "' (standard, forced-feedback, robustness, classification, gap)");
  }

  Json doc{{"mode", a.mode}, {"report", std::move(report)}, {"provenance", to_json(prov)}};
  if (!flags.out.empty()) {
    auto f = open_out(flags.out);
    f << doc.dump(2) << "\n";
  }
  out << table;
  return kExitOk;
}

// ---- serve -----------------------------------------------------------------

std::atomic<bool> g_stop_requested{false};

extern "C" void on_stop_signal(int) { g_stop_requested.store(true); }

struct ServeArgs {
  std::string addr;
  std::string dataset;
  std::string log;
  int ttl_s = -1;
};

std::pair<std::string, int> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0) throw UsageError("address must be host:port, got '" + addr + "'");
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw UsageError("bad port in '" + addr + "'");
  }
  if (port < 0 || port > 65535) throw UsageError("port out of range in '" + addr + "'");
  return {addr.substr(0, colon), port};
}

int cmd_serve(const CommonFlags& flags, const ServeArgs& a, std::ostream& out, std::ostream& err) {
  Settings s = flags.resolve();
  if (const char* v = std::getenv("GRIL_ADDR"); v && *v) s.service.addr = v;
  if (const char* v = std::getenv("GRIL_DATASET"); v && *v) s.service.dataset_path = v;
  if (!a.addr.empty()) s.service.addr = a.addr;
  if (!a.dataset.empty()) s.service.dataset_path = a.dataset;
  if (!a.log.empty()) s.service.log_path = a.log;
  if (a.ttl_s >= 0) s.service.ttl = std::chrono::seconds(a.ttl_s);
  const auto [host, port] = split_addr(s.service.addr);

  std::vector<Problem> dataset;
  if (!s.service.dataset_path.empty()) dataset = read_problems(s.service.dataset_path);

  SessionDefaults defaults{s.env, s.reward, s.judge, s.service.ttl};
  auto log = std::make_shared<TrajectoryLog>(s.service.log_path);
  SessionManager sessions(std::move(dataset), defaults, log);
  HttpService http(sessions);

  const int bound = port == 0 ? http.bind_any_port(host) : -1;
  if (port == 0 && bound < 0) {
    err << "cannot bind " << s.service.addr << "\n";
    return kExitDomainError;
  }

  g_stop_requested.store(false);
  auto prev_int = std::signal(SIGINT, on_stop_signal);
  auto prev_term = std::signal(SIGTERM, on_stop_signal);
  std::atomic<bool> finished{false};
  std::thread watcher([&] {
    while (!finished.load()) {
      if (g_stop_requested.load()) {
        http.stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });

  bool ok = false;
  std::thread server([&] { ok = port == 0 ? http.listen_after_bind() : http.listen(host, port); });
  http.wait_until_ready();
  out << "listening on " << host << ":" << (port == 0 ? bound : port) << "\n" << std::flush;
  server.join();
  finished.store(true);
  watcher.join();
  std::signal(SIGINT, prev_int);
  std::signal(SIGTERM, prev_term);

  if (!ok && !g_stop_requested.load()) {
    err << "cannot bind " << s.service.addr << "\n";
    return kExitDomainError;
  }
  out << "drained " << sessions.drain() << " live sessions\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Missing-premise multi-turn environment tools", "gril"};
  app.require_subcommand(1);

  CommonFlags f_build, f_rollout, f_eval, f_serve;

  DatasetBuildArgs build_args;
  auto* build = app.add_subcommand("dataset-build", "Build a mixed Complete/Incomplete dataset from a corpus");
  f_build.attach(*build);
  build->add_option("corpus", build_args.corpus, "Newline-delimited corpus of Complete problems")->required();
  build->add_option("--oracle", build_args.oracle, "permissive, digit-leak or chat")
      ->check(CLI::IsMember({"permissive", "digit-leak", "chat"}));
  build->add_option("--retry-masks", build_args.retry_masks, "Extra masks tried per item")->check(CLI::NonNegativeNumber);
  build->add_option("--audit", build_args.audit, "Write an audit sample here");

  RolloutArgs rollout_args;
  auto* roll = app.add_subcommand("rollout", "Run a policy over a dataset and log trajectories");
  f_rollout.attach(*roll);
  roll->add_option("dataset", rollout_args.dataset, "Dataset file")->required();
  roll->add_option("--policy", rollout_args.policy, "always-clarify, always-solve, scripted:PATH or remote");
  roll->add_option("--condition", rollout_args.condition, "standard, forced-feedback, noisy or uninformative");
  roll->add_flag("--human", rollout_args.human, "Type the assistant responses yourself");

  EvalArgs eval_args;
  auto* ev = app.add_subcommand("eval", "Compute a report from a trajectory log");
  f_eval.attach(*ev);
  ev->add_option("log", eval_args.log, "Trajectory log")->required();
  ev->add_option("--mode", eval_args.mode, "standard, forced-feedback, robustness, classification or gap");
  ev->add_option("--lexicon", eval_args.lexicon, "Uncertainty phrases, one per line (gap mode)");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Serve sessions over HTTP");
  f_serve.attach(*serve);
  serve->add_option("--addr", serve_args.addr, "host:port (env GRIL_ADDR)");
  serve->add_option("--dataset", serve_args.dataset, "Dataset for problem_ref lookups (env GRIL_DATASET)");
  serve->add_option("--log", serve_args.log, "Append-only trajectory log");
  serve->add_option("--ttl", serve_args.ttl_s, "Seconds finished sessions are retained")->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return cmd_dataset_build(f_build, build_args, out);
    if (*roll) return cmd_rollout(f_rollout, rollout_args, in, out, err);
    if (*ev) return cmd_eval(f_eval, eval_args, out);
    if (*serve) return cmd_serve(f_serve, serve_args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "invalid input:\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    return kExitDomainError;
  } catch (const ShortfallError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsage;
}

}  // namespace gril

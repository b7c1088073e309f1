#include "gril/datagen.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>

#include "gril/errors.hpp"
#include "gril/rng.hpp"
#include "gril/serialize.hpp"
#include "gril/text.hpp"

namespace gril {

namespace {

constexpr std::array<std::string_view, 14> kAbbreviations{
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "e.g", "i.e", "approx", "no", "mt"};

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

// True when the '.' at `dot` ends an abbreviation or a single initial.
bool abbreviation_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !text::is_space(text[b - 1]) && text[b - 1] != '(' && text[b - 1] != '"') --b;
  std::string_view word = text.substr(b, dot - b);
  if (word.size() == 1 && word[0] >= 'A' && word[0] <= 'Z') return true;
  if (word.empty() || !is_alpha(word.back())) return false;
  std::string lower = text::to_lower(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

std::string mask_hash(std::string_view sentence) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08llx",
                static_cast<unsigned long long>(stable_hash(sentence) & 0xffffffffULL));
  return buf;
}

}  // namespace

std::vector<SentenceSpan> sentence_spans(std::string_view s) {
  std::vector<SentenceSpan> spans;
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < s.size() && text::is_space(s[i])) ++i;
  };
  skip_space();
  std::size_t start = i;
  while (i < s.size()) {
    if (!is_terminator(s[i])) {
      ++i;
      continue;
    }
    std::size_t first = i;
    std::size_t j = i;
    while (j < s.size() && is_terminator(s[j])) ++j;
    while (j < s.size() && is_closer(s[j])) ++j;
    const bool at_break = j == s.size() || text::is_space(s[j]);
    const bool decimal = s[first] == '.' && first > 0 && j < s.size() &&
                         std::isdigit(static_cast<unsigned char>(s[first - 1])) &&
                         std::isdigit(static_cast<unsigned char>(s[j]));
    const bool abbrev = s[first] == '.' && j == first + 1 && abbreviation_before(s, first);
    if (at_break && !decimal && !abbrev) {
      spans.push_back({start, j});
      i = j;
      skip_space();
      start = i;
    } else {
      i = j;
    }
  }
  if (start < s.size()) {
    std::size_t end = s.size();
    while (end > start && text::is_space(s[end - 1])) --end;
    if (end > start) spans.push_back({start, end});
  }
  return spans;
}

std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& sp : sentence_spans(text)) out.emplace_back(text.substr(sp.begin, sp.end - sp.begin));
  return out;
}

bool is_question(std::string_view sentence) {
  sentence = text::trim(sentence);
  while (!sentence.empty() && is_closer(sentence.back())) sentence.remove_suffix(1);
  return !sentence.empty() && sentence.back() == '?';
}

std::vector<MaskCandidate> candidate_premises(std::span<const std::string> sentences) {
  std::vector<MaskCandidate> out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (text::contains_digit(sentences[i]) && !is_question(sentences[i])) {
      out.push_back({static_cast<int>(i), sentences[i]});
    }
  }
  return out;
}

std::string_view to_string(MaskLabel v) {
  switch (v) {
    case MaskLabel::Essential: return "Essential";
    case MaskLabel::Redundant: return "Redundant";
    case MaskLabel::Unlabeled: return "Unlabeled";
  }
  return "Unlabeled";
}

std::optional<MaskedProblem> mask_problem(const Problem& problem, std::uint64_t seed,
                                          std::span<const int> excluded_indices) {
  if (problem.kind != ProblemKind::Complete) throw ContractError("mask_problem needs a Complete problem");
  const std::string& q = problem.question;
  const auto spans = sentence_spans(q);
  std::vector<std::string> sentences;
  for (const auto& sp : spans) sentences.push_back(q.substr(sp.begin, sp.end - sp.begin));

  auto candidates = candidate_premises(sentences);
  std::erase_if(candidates, [&](const MaskCandidate& c) {
    return std::find(excluded_indices.begin(), excluded_indices.end(), c.sentence_index) !=
           excluded_indices.end();
  });
  if (candidates.empty()) return std::nullopt;

  // Mixed so that neighbouring seeds give independent draws.
  Rng rng(derive_seed(seed, 0x6d61736b));
  const MaskCandidate& pick = candidates[rng.uniform_index(candidates.size())];
  const auto k = static_cast<std::size_t>(pick.sentence_index);

  // Drop the sentence with its following separator, or the preceding one if it is last.
  std::size_t cut_begin = spans[k].begin;
  std::size_t cut_end = spans[k].end;
  if (k + 1 < spans.size()) {
    cut_end = spans[k + 1].begin;
  } else if (k > 0) {
    cut_begin = spans[k - 1].end;
  }

  MaskedProblem m;
  m.original = problem;
  m.masked_question = q.substr(0, cut_begin) + q.substr(cut_end);
  m.masked_sentence = pick.sentence;
  m.sentence_index = pick.sentence_index;
  return m;
}

SolvabilityVerdict DigitLeakOracle::judge(const MaskedProblem& masked) {
  for (char c : masked.original.gold_answer) {
    if (c >= '0' && c <= '9' && masked.masked_question.find(c) == std::string::npos) {
      return SolvabilityVerdict::Unsolvable;
    }
  }
  return SolvabilityVerdict::Solvable;
}

ChatOracle::ChatOracle(RemoteEndpoint endpoint) : client_([&] {
  endpoint.temperature = 0.0;
  return ChatClient(std::move(endpoint));
}()) {}

std::string ChatOracle::prompt_for(std::string_view masked_question) {
  return "Decide whether the following math word problem gives enough information to compute a "
         "unique numeric answer. Reply with exactly one word: Solvable or Unsolvable.\n\nProblem:\n" +
         std::string(masked_question);
}

SolvabilityVerdict ChatOracle::judge(const MaskedProblem& masked) {
  std::vector<Message> history{{Role::User, prompt_for(masked.masked_question), 0}};
  std::string reply;
  try {
    reply = text::to_lower(client_.complete(history, 0.0));
  } catch (const TransportError& e) {
    throw OracleError(e.what());
  }
  if (reply.find("unsolvable") != std::string::npos) return SolvabilityVerdict::Unsolvable;
  if (reply.find("solvable") != std::string::npos) return SolvabilityVerdict::Solvable;
  throw OracleError("oracle reply names neither verdict: " + reply.substr(0, 80));
}

MaskedProblem label_with_oracle(MaskedProblem masked, SolvabilityOracle& oracle) {
  if (masked.label != MaskLabel::Unlabeled) throw ContractError("mask is already labeled");
  masked.label = oracle.judge(masked) == SolvabilityVerdict::Unsolvable ? MaskLabel::Essential
                                                                        : MaskLabel::Redundant;
  return masked;
}

std::vector<std::string> validate_build_options(const BuildOptions& opts) {
  std::vector<std::string> errors;
  if (!(opts.incomplete_fraction >= 0.0 && opts.incomplete_fraction <= 1.0)) {
    errors.emplace_back("fraction must lie in [0,1]");
  }
  if (opts.retry_masks < 0) errors.emplace_back("retry_masks must be non-negative");
  if (opts.jobs < 1) errors.emplace_back("jobs must be at least 1");
  return errors;
}

ShortfallError::ShortfallError(int achievable, int corpus_size)
    : std::runtime_error("not enough essential masks: achievable incomplete fraction is " +
                         std::to_string(corpus_size == 0 ? 0.0
                                                         : static_cast<double>(achievable) / corpus_size) +
                         " (" + std::to_string(achievable) + "/" + std::to_string(corpus_size) + ")"),
      achievable_(achievable),
      fraction_(corpus_size == 0 ? 0.0 : static_cast<double>(achievable) / corpus_size) {}

namespace {

enum class ItemFate { Essential, Redundant, NoCandidate, Leaked };

struct ItemResult {
  ItemFate fate = ItemFate::NoCandidate;
  std::optional<MaskedProblem> masked;
  int oracle_calls = 0;
};

ItemResult process_item(const Problem& p, std::size_t index, SolvabilityOracle& oracle,
                        const BuildOptions& opts) {
  ItemResult r;
  std::vector<int> tried;
  bool saw_leak = false;
  for (int attempt = 0; attempt <= opts.retry_masks; ++attempt) {
    auto m = mask_problem(p, derive_seed(derive_seed(opts.seed, 0x6d61736b), index * 64 + attempt), tried);
    if (!m) break;
    tried.push_back(m->sentence_index);
    if (text::trim(m->masked_question).empty() ||
        m->masked_question.find(m->masked_sentence) != std::string::npos) {
      saw_leak = true;
      continue;
    }
    ++r.oracle_calls;
    MaskedProblem labeled = label_with_oracle(std::move(*m), oracle);
    if (labeled.label == MaskLabel::Essential) {
      r.fate = ItemFate::Essential;
      r.masked = std::move(labeled);
      return r;
    }
    r.fate = ItemFate::Redundant;
  }
  if (r.fate != ItemFate::Redundant) r.fate = saw_leak ? ItemFate::Leaked : ItemFate::NoCandidate;
  return r;
}

}  // namespace

DatasetBuild build_dataset(std::span<const Problem> corpus, SolvabilityOracle& oracle,
                           const BuildOptions& opts) {
  if (corpus.empty()) throw EmptyInputError("corpus must be non-empty");
  if (auto errors = validate_build_options(opts); !errors.empty()) throw ValidationError(errors);
  {
    std::vector<std::string> errors;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      for (auto& e : validate_problem(corpus[i])) errors.push_back("corpus[" + std::to_string(i) + "]: " + e);
      if (corpus[i].kind != ProblemKind::Complete) {
        errors.push_back("corpus[" + std::to_string(i) + "]: must be Complete");
      }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
  }

  const auto n = corpus.size();
  const auto target = static_cast<std::size_t>(std::llround(opts.incomplete_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng walk_rng(derive_seed(opts.seed, 1));
  walk_rng.shuffle(order);

  DatasetBuild out;
  std::vector<bool> used(n, false);
  std::vector<Problem> incomplete;

  auto base_id = [&](std::size_t i) {
    const Problem& p = corpus[i];
    if (!p.id.empty()) return p.id;
    return p.source.value_or(opts.default_source) + "#" + std::to_string(i);
  };

  std::size_t cursor = 0;
  const auto batch = static_cast<std::size_t>(opts.jobs);
  while (incomplete.size() < target && cursor < n) {
    std::size_t stop = std::min(n, cursor + batch);
    std::vector<ItemResult> results(stop - cursor);
    if (batch == 1) {
      results[0] = process_item(corpus[order[cursor]], order[cursor], oracle, opts);
    } else {
      std::vector<std::future<ItemResult>> futures;
      for (std::size_t k = cursor; k < stop; ++k) {
        futures.push_back(std::async(std::launch::async, process_item, std::cref(corpus[order[k]]),
                                     order[k], std::ref(oracle), std::cref(opts)));
      }
      for (std::size_t k = 0; k < futures.size(); ++k) results[k] = futures[k].get();
    }
    for (std::size_t k = 0; k < results.size(); ++k) {
      out.summary.oracle_calls += results[k].oracle_calls;
      if (incomplete.size() >= target) continue;  // overshoot from the last batch
      const std::size_t idx = order[cursor + k];
      switch (results[k].fate) {
        case ItemFate::Essential: {
          const MaskedProblem& m = *results[k].masked;
          Problem q;
          q.id = base_id(idx) + "#" + mask_hash(m.masked_sentence);
          q.kind = ProblemKind::Incomplete;
          q.question = m.masked_question;
          q.missing_premise = m.masked_sentence;
          q.gold_answer = m.original.gold_answer;
          q.source = m.original.source;
          incomplete.push_back(std::move(q));
          used[idx] = true;
          break;
        }
        case ItemFate::Redundant: ++out.summary.dropped_redundant; break;
        case ItemFate::NoCandidate: ++out.summary.no_candidate; break;
        case ItemFate::Leaked: ++out.summary.leaked; break;
      }
    }
    cursor = stop;
  }
  if (incomplete.size() < target) throw ShortfallError(static_cast<int>(incomplete.size()), static_cast<int>(n));

  out.problems = std::move(incomplete);
  out.summary.incomplete = static_cast<int>(out.problems.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (used[i]) continue;
    Problem p = corpus[i];
    if (p.id.empty()) p.id = base_id(i) + "#full";
    out.problems.push_back(std::move(p));
    ++out.summary.complete;
  }
  Rng mix_rng(derive_seed(opts.seed, 2));
  mix_rng.shuffle(out.problems);
  return out;
}

std::vector<Problem> audit_sample(std::span<const Problem> dataset, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("audit fraction must lie in [0,1]");
  auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(dataset.size())));
  std::vector<std::size_t> idx(dataset.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(derive_seed(seed, 3));
  rng.shuffle(idx);
  idx.resize(std::min(k, idx.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<Problem> out;
  for (auto i : idx) out.push_back(dataset[i]);
  return out;
}

void write_audit_file(std::ostream& out, std::span<const Problem> sample) {
  for (const auto& p : sample) {
    Json j = to_json(p);
    j["human_label"] = "";
    out << dump_line(j) << '\n';
  }
}

}  // namespace gril

#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "gril/datagen.hpp"
#include "support.hpp"

namespace gril::testing {

/// Complete word problems with 1-4 numeric premises, some unnumbered
/// sentences, decimals, abbreviations, and a closing question.
inline std::vector<Problem> synthetic_corpus(Rng& rng, int n) {
  static const char* names[] = {"Tom", "Dr. Lee", "Mrs. Park", "Ana", "Mr. Fox"};
  static const char* items[] = {"apples", "pencils", "jars", "stamps", "books"};
  std::vector<Problem> out;
  for (int i = 0; i < n; ++i) {
    Problem p;
    p.kind = ProblemKind::Complete;
    const std::string who = names[rng.uniform_index(std::size(names))];
    std::string q;
    const int premises = 1 + static_cast<int>(rng.uniform_index(4));
    for (int k = 0; k < premises; ++k) {
      const std::string item = items[rng.uniform_index(std::size(items))];
      if (rng.uniform_index(4) == 0) {
        q += who + " pays " + std::to_string(k + 1) + "." + std::to_string(rng.uniform_index(90) + 10) +
             " dollars for " + item + " batch " + std::to_string(i) + "-" + std::to_string(k) + ". ";
      } else {
        q += who + " has " + std::to_string(rng.uniform_index(40) + 1) + " " + item + " in box " +
             std::to_string(i) + "-" + std::to_string(k) + ". ";
      }
      if (rng.uniform_index(3) == 0) q += "The weather is nice today. ";
    }
    q += "How many " + std::string(items[rng.uniform_index(std::size(items))]) + " are there in total?";
    p.question = q;
    p.gold_answer = std::to_string(rng.uniform_index(500));
    if (rng.uniform_index(2) == 0) p.id = "item-" + std::to_string(i);
    if (rng.uniform_index(3) == 0) p.source = "synthetic";
    out.push_back(std::move(p));
  }
  return out;
}

inline std::map<std::string, int> sentence_multiset(const std::string& text) {
  std::map<std::string, int> m;
  for (auto& s : segment_sentences(text)) ++m[s];
  return m;
}

/// Finds the corpus item an emitted Incomplete problem came from: the one
/// whose sentence multiset equals the masked question's plus the premise.
inline const Problem* reconstruct_source(const Problem& incomplete, const std::vector<Problem>& corpus) {
  auto m = sentence_multiset(incomplete.question);
  ++m[*incomplete.missing_premise];
  for (const auto& c : corpus) {
    if (c.gold_answer == incomplete.gold_answer && sentence_multiset(c.question) == m) return &c;
  }
  return nullptr;
}

}  // namespace gril::testing

#pragma once

#include <string>
#include <string_view>

#include "biasscope/taxonomy.hpp"
#include "biasscope/verdict.hpp"

namespace biasscope {

// Offline rule-based detector. Deterministic and pure; it makes no claim of
// linguistic fidelity. Rule tables are listed in docs/heuristics.md.
struct HeuristicResult {
  Verdict verdict;
  std::string rationale;
};

HeuristicResult heuristic_detect(BiasType bias, std::string_view chunk_text);

inline Verdict heuristic_verdict(BiasType bias, std::string_view chunk_text) {
  return heuristic_detect(bias, chunk_text).verdict;
}

// Jaccard overlap of content-word sets (stopwords removed). Empty sets give 0.
double clause_overlap(std::string_view a, std::string_view b);

inline constexpr double kCircularPresentOverlap = 0.8;
inline constexpr double kCircularUnclearOverlap = 0.6;

}  // namespace biasscope

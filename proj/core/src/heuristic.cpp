#include "biasscope/heuristic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <set>
#include <vector>

#include "biasscope/text.hpp"

namespace biasscope {
namespace {

struct CueTable {
  std::vector<std::string_view> strong;
  std::vector<std::string_view> weak;
};

// Keep in sync with docs/heuristics.md.
const CueTable& cues_for(BiasType bias) {
  static const std::array<CueTable, 6> kTables = {{
      // StrawMan
      {{"so you're saying", "so what you're saying is", "my opponent wants", "they want to ban all",
        "they want to abolish all", "would have you believe", "wants to destroy"},
       {"basically wants", "in other words", "so they think", "all they care about"}},
      // FalseCausality
      {{"ever since", "right after", "must have caused", "which is why", "that's why", "as soon as"},
       {"after", "led to", "caused", "because of"}},
      // CircularReasoning: clause overlap rule, no cue phrases
      {{}, {}},
      // MirrorImaging
      {{"just as we would", "the same way we would", "like any reasonable nation", "they think like us",
        "would never do what we", "same as we do"},
       {"like us", "as we would", "surely they", "any rational"}},
      // ConfirmationBias
      {{"as expected", "this proves what we already knew", "just as i always said", "confirms what we already",
        "i knew it", "only trust"},
       {"obviously", "of course", "proves", "ignore", "dismiss"}},
      // HiddenAssumption
      {{"it goes without saying", "everyone knows", "needless to say", "naturally everyone"},
       {"obviously", "clearly", "of course", "naturally", "must"}},
  }};
  return kTables[bias_index(bias)];
}

const std::set<std::string>& stopwords() {
  static const std::set<std::string> kStop = {"a",    "an",   "the", "is",  "are", "was",  "were", "be",
                                              "been", "being", "and", "or", "of",  "to",   "in",   "on",
                                              "at",   "for",  "with", "that", "this", "as", "by"};
  return kStop;
}

const std::set<std::string>& clause_markers() {
  static const std::set<std::string> kMarkers = {"because", "therefore", "so", "since", "thus", "hence"};
  return kMarkers;
}

std::set<std::string> content_words(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (!stopwords().count(t)) out.insert(t);
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& w : a) common += b.count(w);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

bool contains_phrase(const std::vector<std::string>& tokens, std::string_view phrase) {
  const auto needle = text::word_tokens(phrase);
  if (needle.empty() || needle.size() > tokens.size()) return false;
  return std::search(tokens.begin(), tokens.end(), needle.begin(), needle.end()) != tokens.end();
}

HeuristicResult cue_rule(BiasType bias, std::string_view chunk_text) {
  const auto tokens = text::word_tokens(chunk_text);
  const auto& table = cues_for(bias);
  for (auto cue : table.strong) {
    if (contains_phrase(tokens, cue)) {
      return {Verdict::Present, "matched strong cue \"" + std::string(cue) + "\""};
    }
  }
  std::vector<std::string_view> weak_hits;
  for (auto cue : table.weak) {
    if (contains_phrase(tokens, cue)) weak_hits.push_back(cue);
  }
  if (weak_hits.size() >= 2) {
    return {Verdict::Present, "matched weak cues \"" + std::string(weak_hits[0]) + "\" and \"" +
                                  std::string(weak_hits[1]) + "\""};
  }
  if (weak_hits.size() == 1) {
    return {Verdict::Unclear, "matched a single weak cue \"" + std::string(weak_hits[0]) + "\""};
  }
  return {Verdict::Absent, "no cue phrases matched"};
}

// Segments separated by sentence ends or clause markers; links[i] is true
// when a marker joins segment i to segment i + 1.
struct ClauseSplit {
  std::vector<std::vector<std::string>> segments;
  std::vector<bool> links;
};

ClauseSplit split_clauses(std::string_view chunk_text) {
  ClauseSplit out;
  std::vector<std::string> cur;
  bool pending = false;
  auto push = [&] {
    if (cur.empty()) return;
    if (!out.segments.empty()) out.links.push_back(pending);
    pending = false;
    out.segments.push_back(std::move(cur));
    cur.clear();
  };

  std::string word;
  auto end_word = [&] {
    while (!word.empty() && word.back() == '\'') word.pop_back();
    if (word.empty()) return;
    if (clause_markers().count(word)) {
      push();
      pending = true;
    } else {
      cur.push_back(word);
    }
    word.clear();
  };

  for (char ch : chunk_text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'' && !word.empty()) {
      word.push_back('\'');
    } else {
      end_word();
      if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
        push();
        pending = false;
      }
    }
  }
  end_word();
  push();
  return out;
}

HeuristicResult circular_rule(std::string_view chunk_text) {
  const auto split = split_clauses(chunk_text);
  double best = 0.0;
  for (std::size_t i = 0; i + 1 < split.segments.size(); ++i) {
    if (!split.links[i]) continue;
    best = std::max(best, jaccard(content_words(split.segments[i]), content_words(split.segments[i + 1])));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", best);
  if (best >= kCircularPresentOverlap) return {Verdict::Present, std::string("premise/conclusion overlap ") + buf};
  if (best >= kCircularUnclearOverlap) {
    return {Verdict::Unclear, std::string("partial premise/conclusion overlap ") + buf};
  }
  return {Verdict::Absent, std::string("max premise/conclusion overlap ") + buf};
}

}  // namespace

double clause_overlap(std::string_view a, std::string_view b) {
  return jaccard(content_words(text::word_tokens(a)), content_words(text::word_tokens(b)));
}

HeuristicResult heuristic_detect(BiasType bias, std::string_view chunk_text) {
  if (bias == BiasType::CircularReasoning) return circular_rule(chunk_text);
  return cue_rule(bias, chunk_text);
}

}  // namespace biasscope

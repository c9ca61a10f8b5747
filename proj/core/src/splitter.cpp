#include <algorithm>
#include <string>
#include <utility>

#include "biasscope/corpus.hpp"
#include "biasscope/error.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

void SplitterConfig::validate() const {
  if (max_chunk_chars == 0) throw Error(Errc::InvalidConfig, "max_chunk_chars must be positive");
  if (overlap_chars >= max_chunk_chars) {
    throw Error(Errc::InvalidConfig, "overlap_chars (" + std::to_string(overlap_chars) +
                                         ") must be smaller than max_chunk_chars (" +
                                         std::to_string(max_chunk_chars) + ")");
  }
  if (separators.empty() || !separators.back().empty()) {
    throw Error(Errc::InvalidConfig, "separators must end with the empty string");
  }
  for (const auto& s : separators) {
    if (!text::is_valid_utf8(s)) throw Error(Errc::InvalidConfig, "separator is not valid UTF-8");
  }
}

namespace {

using Range = std::pair<std::size_t, std::size_t>;  // [first, second)

class RecursiveSplitter {
 public:
  RecursiveSplitter(std::u32string_view text, std::vector<std::u32string> separators, std::size_t budget)
      : text_(text), separators_(std::move(separators)), budget_(budget) {}

  std::vector<Range> pieces() {
    out_.clear();
    cut(0, text_.size(), 0);
    return std::move(out_);
  }

 private:
  void cut(std::size_t begin, std::size_t end, std::size_t level) {
    if (end - begin <= budget_) {
      out_.emplace_back(begin, end);
      return;
    }
    const auto view = text_.substr(begin, end - begin);
    std::size_t k = level;
    while (k < separators_.size() && !separators_[k].empty() &&
           view.find(separators_[k]) == std::u32string_view::npos) {
      ++k;
    }
    if (k >= separators_.size() || separators_[k].empty()) {
      for (std::size_t i = begin; i < end; ++i) out_.emplace_back(i, i + 1);
      return;
    }

    // Separators stay attached to the piece they terminate.
    const auto& sep = separators_[k];
    std::size_t pos = 0;
    while (pos < view.size()) {
      const auto hit = view.find(sep, pos);
      const std::size_t stop = hit == std::u32string_view::npos ? view.size() : hit + sep.size();
      const std::size_t a = begin + pos;
      const std::size_t b = begin + stop;
      if (b - a <= budget_) {
        out_.emplace_back(a, b);
      } else {
        cut(a, b, k + 1);
      }
      pos = stop;
    }
  }

  std::u32string_view text_;
  std::vector<std::u32string> separators_;
  std::size_t budget_;
  std::vector<Range> out_;
};

}  // namespace

std::vector<Chunk> split_document(const Document& doc, const SplitterConfig& cfg) {
  cfg.validate();
  const std::u32string cps = text::decode_utf8(doc.text);
  const std::size_t n = cps.size();

  auto make_chunk = [&](std::size_t index, std::size_t start, std::size_t end) {
    return Chunk{doc.doc_id, index, text::encode_utf8(std::u32string_view(cps).substr(start, end - start)), start,
                 end};
  };

  if (n <= cfg.max_chunk_chars) return {make_chunk(0, 0, n)};

  // Room left for the new content of each chunk once the overlap prefix is added.
  const std::size_t budget = cfg.max_chunk_chars - cfg.overlap_chars;
  std::vector<std::u32string> seps;
  seps.reserve(cfg.separators.size());
  for (const auto& s : cfg.separators) seps.push_back(text::decode_utf8(s));

  RecursiveSplitter splitter(cps, std::move(seps), budget);
  const auto pieces = splitter.pieces();

  std::vector<Range> cores;
  Range current = pieces.front();
  for (std::size_t i = 1; i < pieces.size(); ++i) {
    if (pieces[i].second - current.first <= budget) {
      current.second = pieces[i].second;
    } else {
      cores.push_back(current);
      current = pieces[i];
    }
  }
  cores.push_back(current);

  std::vector<Chunk> chunks;
  chunks.reserve(cores.size());
  for (std::size_t i = 0; i < cores.size(); ++i) {
    std::size_t start = cores[i].first;
    if (i > 0) {
      // Never reach back to the previous chunk's own start: span_start stays strictly increasing.
      const std::size_t earliest = cores[i - 1].first + 1;
      start = cores[i].first >= earliest + cfg.overlap_chars ? cores[i].first - cfg.overlap_chars : earliest;
    }
    chunks.push_back(make_chunk(i, start, cores[i].second));
  }
  return chunks;
}

std::size_t overlap_with_previous(const std::vector<Chunk>& chunks, std::size_t i) {
  if (i == 0 || i >= chunks.size()) return 0;
  const auto& prev = chunks[i - 1];
  const auto& cur = chunks[i];
  return prev.span_end > cur.span_start ? prev.span_end - cur.span_start : 0;
}

}  // namespace biasscope

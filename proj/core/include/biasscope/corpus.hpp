#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "biasscope/taxonomy.hpp"
#include "biasscope/verdict.hpp"

namespace biasscope {

// Editorial-review tier of a source.
enum class RigorLevel { Low, Medium, High };

std::string_view identifier_of(RigorLevel r) noexcept;
std::optional<RigorLevel> parse_rigor(std::string_view id) noexcept;

struct SourceMeta {
  std::string source_name;
  std::optional<std::string> url;
  RigorLevel rigor = RigorLevel::Low;
  std::optional<std::string> topic;
  std::optional<std::string> stance;
};

// Human-curated labels; a bias absent from the map is unlabeled.
struct GroundTruth {
  std::map<BiasType, Verdict> labels;

  std::optional<Verdict> label_for(BiasType b) const;
};

struct Document {
  std::string doc_id;  // sha256 hex of text
  std::string text;    // LF line endings
  SourceMeta meta;
  std::optional<GroundTruth> ground_truth;
};

// Validates UTF-8, normalizes line endings and computes doc_id.
// Throws Error(EmptyDocument) or Error(InvalidEncoding).
Document ingest_document(std::string_view raw_text, SourceMeta meta,
                         std::optional<GroundTruth> ground_truth = std::nullopt);

struct CorpusOptions {
  bool lenient = false;  // accept unknown keys in corpus records
};

// JSON-lines corpus, one record per line. Blank lines are skipped.
// Throws Error(Io), Error(Malformed) with line(), or Error(DuplicateDocument).
std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusOptions options = {});

// Parses one corpus record.
Document document_from_json(const nlohmann::json& record, CorpusOptions options = {});
nlohmann::json document_to_json(const Document& doc);

// Appends documents to a corpus file, refusing doc_ids already present.
void append_to_corpus(const std::filesystem::path& path, const std::vector<Document>& docs);

// Character (code point) limits; a character never straddles two chunks.
struct SplitterConfig {
  std::size_t max_chunk_chars = 1500;
  std::size_t overlap_chars = 200;
  std::vector<std::string> separators = {"\n\n", "\n", ". ", " ", ""};

  // Throws Error(InvalidConfig) when an invariant fails.
  void validate() const;
};

struct Chunk {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  // Code point offsets into the parent document, half-open.
  std::size_t span_start = 0;
  std::size_t span_end = 0;

  bool operator==(const Chunk&) const = default;
};

// Recursive character splitting: pieces are cut on the first separator that
// applies, oversized pieces are re-cut with the next separator, and adjacent
// pieces are greedily merged. Each chunk after the first is prefixed with up
// to overlap_chars characters of the previous chunk's own content.
std::vector<Chunk> split_document(const Document& doc, const SplitterConfig& cfg);

// Number of leading characters of chunks[i] that repeat chunks[i-1].
std::size_t overlap_with_previous(const std::vector<Chunk>& chunks, std::size_t i);

}  // namespace biasscope

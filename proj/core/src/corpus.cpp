#include "biasscope/corpus.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "biasscope/error.hpp"
#include "biasscope/hashing.hpp"
#include "biasscope/text.hpp"

namespace biasscope {

using nlohmann::json;

std::string_view identifier_of(RigorLevel r) noexcept {
  switch (r) {
    case RigorLevel::Low: return "low";
    case RigorLevel::Medium: return "medium";
    case RigorLevel::High: return "high";
  }
  return "low";
}

std::optional<RigorLevel> parse_rigor(std::string_view id) noexcept {
  for (RigorLevel r : {RigorLevel::Low, RigorLevel::Medium, RigorLevel::High}) {
    if (text::iequals(id, identifier_of(r))) return r;
  }
  return std::nullopt;
}

std::optional<Verdict> GroundTruth::label_for(BiasType b) const {
  auto it = labels.find(b);
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

Document ingest_document(std::string_view raw_text, SourceMeta meta, std::optional<GroundTruth> ground_truth) {
  if (!text::is_valid_utf8(raw_text)) throw Error(Errc::InvalidEncoding, "document is not valid UTF-8");
  std::string normalized = text::normalize_newlines(raw_text);
  if (text::trim(normalized).empty()) throw Error(Errc::EmptyDocument, "document text is empty after trimming");
  if (text::trim(meta.source_name).empty()) throw Error(Errc::Malformed, "source_name must not be empty");

  Document doc;
  doc.doc_id = sha256_hex(normalized);
  doc.text = std::move(normalized);
  doc.meta = std::move(meta);
  doc.ground_truth = std::move(ground_truth);
  return doc;
}

namespace {

const std::set<std::string> kRecordKeys = {"text", "source_name", "url", "rigor", "topic", "stance", "labels"};

std::optional<std::string> optional_string(const json& rec, const char* key) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(Errc::Malformed, std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

std::string required_string(const json& rec, const char* key) {
  auto value = optional_string(rec, key);
  if (!value) throw Error(Errc::Malformed, std::string("missing required field '") + key + "'");
  return *value;
}

}  // namespace

Document document_from_json(const json& rec, CorpusOptions options) {
  if (!rec.is_object()) throw Error(Errc::Malformed, "record must be a JSON object");
  if (!options.lenient) {
    for (const auto& [key, value] : rec.items()) {
      if (!kRecordKeys.count(key)) throw Error(Errc::Malformed, "unknown key '" + key + "'");
    }
  }

  SourceMeta meta;
  meta.source_name = required_string(rec, "source_name");
  const auto rigor_id = required_string(rec, "rigor");
  const auto rigor = parse_rigor(rigor_id);
  if (!rigor) throw Error(Errc::Malformed, "rigor must be low, medium or high (got '" + rigor_id + "')");
  meta.rigor = *rigor;
  meta.url = optional_string(rec, "url");
  meta.topic = optional_string(rec, "topic");
  meta.stance = optional_string(rec, "stance");

  std::optional<GroundTruth> truth;
  if (auto it = rec.find("labels"); it != rec.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(Errc::Malformed, "'labels' must be an object");
    GroundTruth gt;
    for (const auto& [key, value] : it->items()) {
      BiasType bias;
      try {
        bias = parse_bias_type(key);
      } catch (const Error& e) {
        throw Error(Errc::Malformed, std::string("labels: ") + e.what());
      }
      if (!value.is_string()) throw Error(Errc::Malformed, "label for '" + key + "' must be a string");
      const auto verdict = parse_verdict_id(value.get<std::string>());
      if (!verdict) {
        throw Error(Errc::Malformed, "label for '" + key + "' must be present, absent or unclear");
      }
      gt.labels[bias] = *verdict;
    }
    truth = std::move(gt);
  }

  return ingest_document(required_string(rec, "text"), std::move(meta), std::move(truth));
}

json document_to_json(const Document& doc) {
  json rec = json::object();
  rec["text"] = doc.text;
  rec["source_name"] = doc.meta.source_name;
  if (doc.meta.url) rec["url"] = *doc.meta.url;
  rec["rigor"] = identifier_of(doc.meta.rigor);
  if (doc.meta.topic) rec["topic"] = *doc.meta.topic;
  if (doc.meta.stance) rec["stance"] = *doc.meta.stance;
  if (doc.ground_truth) {
    json labels = json::object();
    for (const auto& [bias, verdict] : doc.ground_truth->labels) {
      labels[std::string(identifier_of(bias))] = identifier_of(verdict);
    }
    rec["labels"] = std::move(labels);
  }
  return rec;
}

std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read corpus " + path.string());

  std::vector<Document> docs;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    Document doc;
    try {
      doc = document_from_json(json::parse(line), options);
    } catch (const json::exception& e) {
      throw Error(Errc::Malformed, path.string() + ":" + std::to_string(line_no) + ": " + e.what())
          .at_line(line_no);
    } catch (const Error& e) {
      const Errc code = e.code() == Errc::EmptyDocument || e.code() == Errc::InvalidEncoding ? e.code()
                                                                                              : Errc::Malformed;
      throw Error(code, path.string() + ":" + std::to_string(line_no) + ": " + e.what()).at_line(line_no);
    }
    if (!seen.insert(doc.doc_id).second) {
      throw Error(Errc::DuplicateDocument,
                  path.string() + ":" + std::to_string(line_no) + ": duplicate document " + doc.doc_id)
          .at_line(line_no);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void append_to_corpus(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::set<std::string> seen;
  if (std::filesystem::exists(path)) {
    for (const auto& d : load_corpus(path, {.lenient = true})) seen.insert(d.doc_id);
  }
  for (const auto& d : docs) {
    if (!seen.insert(d.doc_id).second) {
      throw Error(Errc::DuplicateDocument, "document " + d.doc_id + " already in " + path.string());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::Io, "cannot write corpus " + path.string());
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
  out.flush();
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace biasscope

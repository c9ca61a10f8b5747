#include "support.hpp"

#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biasscope/corpus.hpp"
#include "biasscope/runner.hpp"
#include "biasscope/text.hpp"
#include "biasscope_cli/cli.hpp"

namespace biasscope::testing {

std::filesystem::path source_dir() { return BIASSCOPE_SOURCE_DIR; }

std::filesystem::path fixture(const std::string& relative) { return source_dir() / "tests" / "fixtures" / relative; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << content;
}

TempDir::TempDir() {
  std::random_device rd;
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("biasscope-test-" + std::to_string(rd()));
    if (std::filesystem::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

void write_count_fixture(const std::filesystem::path& dir, const std::string& run_id,
                         const std::vector<BiasCount>& counts) {
  const auto corpus_path = dir / "corpus.jsonl";
  std::vector<Document> docs;
  std::vector<DetectionRecord> records;
  RunPlan plan;
  plan.run_id = run_id;
  plan.corpus_ref = corpus_path;
  plan.created_at = "2024-05-01T00:00:00.000Z";
  Arm arm;
  arm.backend.backend_id = "ours";
  arm.backend.kind = BackendKind::Heuristic;
  plan.arms.push_back(arm);

  for (const auto& c : counts) {
    plan.biases.push_back(c.bias);
    for (std::uint64_t k = 0; k < c.correct + c.incorrect; ++k) {
      GroundTruth truth;
      truth.labels[c.bias] = Verdict::Absent;
      SourceMeta meta;
      meta.source_name = "count-fixture";
      docs.push_back(ingest_document(std::string(identifier_of(c.bias)) + " sample " + std::to_string(k), meta, truth));

      DetectionRecord r;
      r.run_id = run_id;
      r.doc_id = docs.back().doc_id;
      r.bias = c.bias;
      r.backend_id = "ours";
      r.prompt_hash = "0";
      r.verdict = k < c.correct ? Verdict::Absent : Verdict::Present;
      r.parse_quality = ParseQuality::Strict;
      r.rationale = "fixture";
      r.created_at = plan.created_at;
      records.push_back(std::move(r));
    }
  }
  append_to_corpus(corpus_path, docs);
  plan.task_count = records.size();

  const RunStore store(dir / "runs");
  std::filesystem::create_directories(store.run_dir(run_id));
  store.write_plan(plan);
  std::string lines;
  for (const auto& r : records) lines += record_to_json(r).dump() + "\n";
  write_text(store.records_path(run_id), lines);
}

std::vector<JudgedRecord> judged_counts(const std::string& backend_id, BiasType bias, std::uint64_t correct,
                                        std::uint64_t incorrect) {
  std::vector<JudgedRecord> out;
  for (std::uint64_t k = 0; k < correct + incorrect; ++k) {
    JudgedRecord j;
    j.sample = {"doc-" + std::to_string(k), 0, bias};
    j.backend_id = backend_id;
    j.human = Verdict::Absent;
    j.model = k < correct ? Verdict::Absent : Verdict::Present;
    j.judgment = k < correct ? Judgment::Correct : Judgment::Incorrect;
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<TableRow> read_table_csv(const std::filesystem::path& path) {
  std::vector<TableRow> rows;
  const auto content = read_text(path);
  const auto lines = text::split_lines(content);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const auto cells = text::split(lines[i], ',');
    if (cells.size() != 4) throw std::runtime_error(path.string() + ": bad row " + std::string(lines[i]));
    rows.push_back({parse_bias_type(cells[0]), std::stoull(cells[1]), std::stoull(cells[2]), cells[3]});
  }
  return rows;
}

std::vector<AnnotationTask> synthetic_tasks(const std::string& run_id, std::size_t count) {
  std::vector<AnnotationTask> out;
  for (std::size_t i = 0; i < count; ++i) {
    AnnotationTask t;
    t.run_id = run_id;
    t.doc_id = "doc-" + std::to_string(i);
    t.bias = kAllBiases[i % kAllBiases.size()];
    t.phase = Phase::Phase1;
    t.task_id = make_task_id(run_id, t.sample(), t.phase);
    t.sample_text = "sample " + std::to_string(i);
    t.model_outputs.push_back({"ours", kAllVerdicts[i % 3], "because", std::nullopt});
    out.push_back(std::move(t));
  }
  return out;
}

std::string check_split(const Document& doc, const SplitterConfig& cfg, const std::vector<Chunk>& chunks) {
  const std::u32string cps = text::decode_utf8(doc.text);
  if (chunks.empty()) return "no chunks";
  std::u32string rebuilt;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    const auto where = "chunk " + std::to_string(i) + ": ";
    if (c.index != i) return where + "index out of order";
    if (c.doc_id != doc.doc_id) return where + "wrong doc_id";
    if (c.span_start >= c.span_end || c.span_end > cps.size()) return where + "bad span";
    const std::u32string piece = text::decode_utf8(c.text);
    if (piece != cps.substr(c.span_start, c.span_end - c.span_start)) return where + "text differs from span";
    if (piece.size() > cfg.max_chunk_chars) return where + "longer than max_chunk_chars";
    if (i == 0) {
      if (c.span_start != 0) return where + "does not start at 0";
      rebuilt = piece;
      continue;
    }
    const auto& prev = chunks[i - 1];
    if (c.span_start <= prev.span_start) return where + "span_start not increasing";
    if (c.span_start > prev.span_end) return where + "gap after previous chunk";
    const std::size_t overlap = prev.span_end - c.span_start;
    if (overlap > cfg.overlap_chars) return where + "overlap exceeds overlap_chars";
    if (c.span_end <= prev.span_end) return where + "adds no new text";
    rebuilt += piece.substr(overlap);
  }
  if (chunks.back().span_end != cps.size()) return "last chunk does not reach the end";
  if (rebuilt != cps) return "reconstruction differs from document";
  return "";
}

std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> words = {"the", "council", "lanes", "opened", "because", "caf\xc3\xa9",
                                                 "\xe2\x82\xac" "5", "\xf0\x9f\x98\x80", "policy", "a", "therefore"};
  static const std::vector<std::string> separators = {"\n\n", "\n", ". ", " "};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::size_t target = 1 + pick(20000);
  // Separator density: 0 gives one unbroken token, 100 a separator per word.
  const std::size_t density = pick(101);
  std::u32string cps;
  while (cps.size() < target) {
    if (pick(100) < density) {
      cps += text::decode_utf8(separators[pick(separators.size())]);
    } else if (pick(50) == 0) {
      cps += std::u32string(1 + pick(3000), U'x');
    } else {
      cps += text::decode_utf8(words[pick(words.size())]);
    }
  }
  cps.resize(target);
  if (text::trim(text::encode_utf8(cps)).empty()) cps[0] = U'x';
  return text::encode_utf8(cps);
}

std::vector<std::string> e2e_args(const std::filesystem::path& runs_dir, std::vector<std::string> rest) {
  std::vector<std::string> args = {"--config", fixture("e2e/biasscope.toml").string(), "--runs-dir", runs_dir.string()};
  args.insert(args.end(), rest.begin(), rest.end());
  return args;
}

}  // namespace biasscope::testing

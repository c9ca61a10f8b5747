// Shared helpers for unit and acceptance tests.
#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "biasscope/annotation.hpp"
#include "biasscope/corpus.hpp"
#include "biasscope/evaluation.hpp"
#include "biasscope/taxonomy.hpp"

namespace biasscope::testing {

std::filesystem::path source_dir();
std::filesystem::path fixture(const std::string& relative);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::vector<std::string>& args);

struct BiasCount {
  BiasType bias;
  std::uint64_t correct;
  std::uint64_t incorrect;
};

// Writes corpus, plan and records for a single-arm run (arm id "ours") whose
// judgment against labels yields exactly the given per-bias counts.
void write_count_fixture(const std::filesystem::path& dir, const std::string& run_id,
                         const std::vector<BiasCount>& counts);

// Judged records for one arm and bias: `correct` Correct rows then
// `incorrect` Incorrect rows over samples doc-0, doc-1, ...
std::vector<JudgedRecord> judged_counts(const std::string& backend_id, BiasType bias, std::uint64_t correct,
                                        std::uint64_t incorrect);

struct TableRow {
  BiasType bias;
  std::uint64_t correct;
  std::uint64_t incorrect;
  std::string accuracy;
};

// Reads a bias,correct,incorrect,accuracy CSV fixture.
std::vector<TableRow> read_table_csv(const std::filesystem::path& path);

// Phase 1 tasks for run `run_id`, each with one model output (backend "ours")
// whose verdict cycles present/absent/unclear.
std::vector<AnnotationTask> synthetic_tasks(const std::string& run_id, std::size_t count);

// Checks every chunk invariant plus span-based reconstruction of the
// document. Returns an empty string when all hold, else the first violation.
std::string check_split(const Document& doc, const SplitterConfig& cfg, const std::vector<Chunk>& chunks);

// Random document of 1 to 20,000 characters with a random separator density,
// long unbroken runs and multi-byte characters.
std::string random_text(std::mt19937_64& rng);

// Arguments that point the CLI at the offline end-to-end fixture.
std::vector<std::string> e2e_args(const std::filesystem::path& runs_dir, std::vector<std::string> rest);

}  // namespace biasscope::testing

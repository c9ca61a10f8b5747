#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "biasscope/text.hpp"
#include "biasscope_cli/cli.hpp"
#include "support.hpp"

using namespace biasscope;
using biasscope::testing::BiasCount;
using biasscope::testing::e2e_args;
using biasscope::testing::fixture;
using biasscope::testing::read_table_csv;
using biasscope::testing::read_text;
using biasscope::testing::run_cli;
using biasscope::testing::TempDir;
using biasscope::testing::write_count_fixture;
using biasscope::testing::write_text;

namespace {

std::vector<BiasCount> table1_counts() {
  std::vector<BiasCount> counts;
  for (const auto& r : read_table_csv(fixture("paper_tables/table1.csv"))) counts.push_back({r.bias, r.correct, r.incorrect});
  return counts;
}

std::vector<std::string> dirs(const TempDir& dir, std::vector<std::string> rest) {
  std::vector<std::string> args = {"--runs-dir", (dir / "runs").string(), "--annotations-dir", (dir / "ann").string()};
  args.insert(args.end(), rest.begin(), rest.end());
  return args;
}

}  // namespace

TEST(Cli, VersionListsTemplateAndProfiles) {
  const auto r = run_cli({"--version"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_EQ(r.out.rfind("biasscope ", 0), 0u);
  EXPECT_NE(r.out.find("template_version 1.0.0"), std::string::npos);
  EXPECT_NE(r.out.find("profile straw-man 1.0.0"), std::string::npos);
  EXPECT_NE(r.out.find("profile hidden-assumption 1.0.0"), std::string::npos);
}

TEST(Cli, UsageErrorsExitOneWithFixHint) {
  const auto no_cmd = run_cli({});
  EXPECT_EQ(no_cmd.code, cli::kExitUsage);
  const auto missing = run_cli({"evaluate", "--run", "x"});
  EXPECT_EQ(missing.code, cli::kExitUsage);
  EXPECT_NE(missing.err.find("--against"), std::string::npos) << missing.err;
  const auto bad_format = run_cli(e2e_args("/nonexistent", {"report", "--run", "x", "--format", "xml"}));
  EXPECT_EQ(bad_format.code, cli::kExitUsage);
  EXPECT_NE(bad_format.err.find("error: --format"), std::string::npos) << bad_format.err;
  EXPECT_NE(bad_format.err.find("fix:"), std::string::npos) << bad_format.err;
}

TEST(Cli, RuntimeErrorsExitTwo) {
  TempDir dir;
  const auto unknown = run_cli(dirs(dir, {"report", "--run", "ghost"}));
  EXPECT_EQ(unknown.code, cli::kExitUsage);
  EXPECT_NE(unknown.err.find("error: --run"), std::string::npos) << unknown.err;

  write_count_fixture(dir.path(), "R1", {{BiasType::StrawMan, 1, 1}});
  write_text(dir / "runs/R1/records.jsonl", "{corrupt}\n{\"also\": 1}\n");
  const auto corrupt = run_cli(dirs(dir, {"report", "--run", "R1"}));
  EXPECT_EQ(corrupt.code, cli::kExitRuntime);
  EXPECT_NE(corrupt.err.find("CorruptStore"), std::string::npos) << corrupt.err;
  EXPECT_TRUE(corrupt.out.empty());
}

TEST(Cli, ReportTableOnFirstPhaseCounts) {
  TempDir dir;
  write_count_fixture(dir.path(), "R1", table1_counts());
  const auto r = run_cli(dirs(dir, {"report", "--run", "R1", "--format", "table"}));
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("Confirmation Bias         721         12     98.36            0\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Circular Reasoning        442          0    100.00"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Total                    4261         60     98.61"), std::string::npos) << r.out;

  const auto csv = run_cli(dirs(dir, {"report", "--run", "R1", "--format", "csv"}));
  ASSERT_EQ(csv.code, cli::kExitOk);
  for (const auto& row : read_table_csv(fixture("paper_tables/table1.csv"))) {
    const auto line = std::string(identifier_of(row.bias)) + "," + std::to_string(row.correct) + "," +
                      std::to_string(row.incorrect) + "," + row.accuracy + "\n";
    EXPECT_NE(csv.out.find(line), std::string::npos) << line;
  }
}

TEST(Cli, EvaluateIsRepeatable) {
  TempDir dir;
  write_count_fixture(dir.path(), "R1", {{BiasType::StrawMan, 5, 2}, {BiasType::MirrorImaging, 3, 0}});
  const auto a = run_cli(dirs(dir, {"evaluate", "--run", "R1", "--against", "labels"}));
  const auto b = run_cli(dirs(dir, {"evaluate", "--run", "R1", "--against", "labels"}));
  ASSERT_EQ(a.code, cli::kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["arms"][0]["rows"][0]["accuracy"], "71.43");
  const auto no_annotations = run_cli(dirs(dir, {"evaluate", "--run", "R1", "--against", "annotations"}));
  EXPECT_EQ(no_annotations.code, cli::kExitUsage);
  EXPECT_NE(no_annotations.err.find("--against"), std::string::npos);
}

TEST(Cli, IngestThenSplit) {
  TempDir dir;
  write_text(dir / "a.txt", "First paragraph.\r\n\r\nSecond paragraph.");
  const auto corpus = (dir / "corpus.jsonl").string();
  const auto ing = run_cli({"ingest", (dir / "a.txt").string(), "--meta", R"({"source_name":"blog","rigor":"low"})",
                            "--corpus", corpus});
  ASSERT_EQ(ing.code, cli::kExitOk) << ing.err;
  const auto fields = text::split(std::string(text::trim(ing.out)), '\t');
  ASSERT_EQ(fields.size(), 3u);
  EXPECT_EQ(fields[0].size(), 64u);
  EXPECT_EQ(fields[2], "35");

  const auto again = run_cli({"ingest", (dir / "a.txt").string(), "--meta", R"({"source_name":"blog","rigor":"low"})",
                              "--corpus", corpus});
  EXPECT_EQ(again.code, cli::kExitRuntime);

  const auto split = run_cli({"split", "--doc", fields[0].substr(0, 8), "--max", "20", "--overlap", "0", "--corpus", corpus});
  ASSERT_EQ(split.code, cli::kExitOk) << split.err;
  EXPECT_NE(split.out.find("Second paragraph."), std::string::npos) << split.out;

  EXPECT_EQ(run_cli({"ingest", (dir / "a.txt").string(), "--meta", "not json", "--corpus", corpus}).code,
            cli::kExitUsage);
}

TEST(Cli, DryRunListsFixtureKeys) {
  TempDir dir;
  const auto r = run_cli(e2e_args(dir / "runs", {"run", "--dry-run", "--corpus", fixture("e2e/corpus.jsonl").string(),
                                                 "--arms", "ours", "--biases", "straw-man"}));
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto lines = text::split_lines(r.out);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines[0], "doc_id\tchunk\tbias\tbackend_id\tprompt_mode\tprompt_hash\tfixture_key");
  std::size_t rows = 0;
  for (const auto& l : std::vector(lines.begin() + 1, lines.end())) {
    if (l.empty()) continue;
    EXPECT_EQ(text::split(l, '\t').size(), 7u) << l;
    ++rows;
  }
  EXPECT_EQ(rows, 60u);
  EXPECT_FALSE(std::filesystem::exists(dir / "runs"));
}

TEST(Cli, TasksAndExport) {
  TempDir dir;
  const auto args = [&](std::vector<std::string> rest) {
    auto a = e2e_args(dir / "runs", rest);
    a.insert(a.begin(), {"--annotations-dir", (dir / "ann").string()});
    return a;
  };
  ASSERT_EQ(run_cli(args({"run", "--run-id", "e", "--corpus", fixture("e2e/corpus.jsonl").string(), "--arms",
                                  "ours,mixtral-basic,llama-basic", "--biases", "straw-man"})).code, cli::kExitOk);
  const auto t = run_cli(args({"tasks", "--run", "e", "--phase", "2", "--arms", "ours,mixtral-basic,llama-basic"}));
  ASSERT_EQ(t.code, cli::kExitOk) << t.err;
  EXPECT_NE(t.out.find("60"), std::string::npos) << t.out;
  EXPECT_EQ(run_cli(args({"tasks", "--run", "e", "--phase", "2", "--arms", "ours"})).code, cli::kExitUsage);
  const auto ex = run_cli(args({"export", "--phase", "2"}));
  EXPECT_EQ(ex.code, cli::kExitOk);
  EXPECT_EQ(ex.out, "");
}

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "biasscope/report.hpp"
#include "support.hpp"

using namespace biasscope;
using biasscope::testing::judged_counts;

namespace {

EvaluationReport sample_report(std::size_t arm_count) {
  RunPlan plan;
  plan.run_id = "R1";
  plan.biases = {BiasType::StrawMan, BiasType::ConfirmationBias};
  std::vector<JudgedRecord> judged;
  for (std::size_t a = 0; a < arm_count; ++a) {
    Arm arm;
    arm.backend.backend_id = "arm" + std::to_string(a);
    plan.arms.push_back(arm);
    for (auto [bias, c, i] : {std::tuple{BiasType::StrawMan, 619u, 15u}, std::tuple{BiasType::ConfirmationBias, 721u, 12u}}) {
      auto part = judged_counts(arm.backend.backend_id, bias, c - a, i + a);
      judged.insert(judged.end(), part.begin(), part.end());
    }
  }
  std::vector<DetectionRecord> records(3);
  records[0].backend_id = "arm0";
  records[0].verdict = Verdict::Present;
  records[1].backend_id = "arm0";
  records[1].verdict = Verdict::Absent;
  records[2].backend_id = "arm0";
  records[2].error = "Unparseable: ?";
  return build_report(plan, records, judged, "labels", JudgeLevel::Document);
}

}  // namespace

TEST(Report, FormatIdentifiers) {
  for (auto f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Table}) {
    EXPECT_EQ(parse_report_format(identifier_of(f)), f);
  }
  EXPECT_FALSE(parse_report_format("xml"));
  EXPECT_EQ(table_label(BiasType::StrawMan), "Straw Man Fallacy");
}

TEST(Report, CsvSingleArm) {
  EXPECT_EQ(render_csv(sample_report(1)),
            "bias,correct,incorrect,accuracy\n"
            "straw-man,619,15,97.63\n"
            "confirmation-bias,721,12,98.36\n");
}

TEST(Report, CsvPrependsArmColumnForSeveralArms) {
  const auto csv = render_csv(sample_report(2));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "arm,bias,correct,incorrect,accuracy");
  EXPECT_NE(csv.find("arm1,straw-man,618,16,97.48\n"), std::string::npos) << csv;
}

TEST(Report, TableRowsAreAligned) {
  const auto table = render_table(sample_report(1));
  EXPECT_EQ(table.substr(0, table.find('\n')), "Run R1 | judged against labels (auto-judged) | document level");
  EXPECT_NE(table.find("Arm arm0 (structured prompt): 1367 judged, 1 unparseable, 0 errored"), std::string::npos);
  EXPECT_NE(table.find("Confirmation Bias         721         12     98.36            0\n"), std::string::npos) << table;
  EXPECT_NE(table.find("Total                    1340         27     98.02            1\n"), std::string::npos) << table;
  EXPECT_NE(table.find("Straw Man Fallacy           1        1        0"), std::string::npos) << table;
}

TEST(Report, JsonShape) {
  const auto j = report_to_json(sample_report(1));
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"run_id", "source", "auto_judged", "level", "arms", "warnings"}));
  const auto& arm = j["arms"][0];
  EXPECT_EQ(arm["rows"][0]["accuracy"], "97.63");
  EXPECT_EQ(arm["totals"]["correct"], 1340);
  EXPECT_EQ(arm["distribution"]["straw-man"]["present"], 1);
  EXPECT_EQ(render_report(sample_report(1), ReportFormat::Json), j.dump(2) + "\n");
}

TEST(Report, ComparisonFormats) {
  Comparison cmp;
  cmp.arms = {"ours", "mixtral-basic", "llama-basic"};
  cmp.rows.push_back({BiasType::CircularReasoning, {{373, "100.00"}, {209, "56.03"}, {150, "40.21"}}});
  EXPECT_EQ(render_comparison(cmp, ReportFormat::Csv),
            "arm,bias,correct,accuracy\n"
            "ours,circular-reasoning,373,100.00\n"
            "mixtral-basic,circular-reasoning,209,56.03\n"
            "llama-basic,circular-reasoning,150,40.21\n");
  const auto table = render_comparison(cmp, ReportFormat::Table);
  EXPECT_NE(table.find("Circular Reasoning"), std::string::npos);
  EXPECT_NE(table.find("373 (100.00)"), std::string::npos);
  const auto j = nlohmann::json::parse(render_comparison(cmp, ReportFormat::Json));
  EXPECT_EQ(j["rows"][0]["cells"][2]["correct"], 150);
}

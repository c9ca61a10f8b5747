#include "biasscope/report.hpp"

#include <fmt/format.h>

#include "biasscope/text.hpp"

namespace biasscope {

std::string_view identifier_of(ReportFormat f) noexcept {
  switch (f) {
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Table: return "table";
  }
  return "table";
}

std::optional<ReportFormat> parse_report_format(std::string_view id) noexcept {
  for (auto f : {ReportFormat::Csv, ReportFormat::Json, ReportFormat::Table}) {
    if (text::iequals(id, identifier_of(f))) return f;
  }
  return std::nullopt;
}

std::string_view table_label(BiasType bias) noexcept {
  switch (bias) {
    case BiasType::StrawMan: return "Straw Man Fallacy";
    case BiasType::FalseCausality: return "False Causality";
    case BiasType::CircularReasoning: return "Circular Reasoning";
    case BiasType::MirrorImaging: return "Mirror Imaging";
    case BiasType::ConfirmationBias: return "Confirmation Bias";
    case BiasType::HiddenAssumption: return "Hidden Assumption";
  }
  return "";
}

nlohmann::ordered_json report_to_json(const EvaluationReport& report) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["run_id"] = report.run_id;
  j["source"] = report.source;
  j["auto_judged"] = report.auto_judged;
  j["level"] = report.level;
  ordered_json arms = ordered_json::array();
  for (const auto& arm : report.arms) {
    ordered_json a;
    a["backend_id"] = arm.backend_id;
    a["prompt_mode"] = arm.prompt_mode;
    a["judged"] = arm.judged;
    a["unparseable"] = arm.unparseable;
    a["errored"] = arm.errored;
    ordered_json rows = ordered_json::array();
    for (const auto& r : arm.rows) {
      rows.push_back({{"bias", identifier_of(r.bias)},
                      {"correct", r.correct},
                      {"incorrect", r.incorrect},
                      {"accuracy", r.accuracy_pct},
                      {"unparseable", r.unparseable}});
    }
    a["rows"] = std::move(rows);
    if (arm.totals) {
      a["totals"] = {{"correct", arm.totals->correct},
                     {"incorrect", arm.totals->incorrect},
                     {"accuracy", arm.totals->accuracy_pct}};
    } else {
      a["totals"] = nullptr;
    }
    ordered_json dist;
    for (BiasType b : kAllBiases) {
      ordered_json counts;
      for (Verdict v : kAllVerdicts) counts[std::string(identifier_of(v))] = arm.distribution[bias_index(b)][verdict_index(v)];
      dist[std::string(identifier_of(b))] = std::move(counts);
    }
    a["distribution"] = std::move(dist);
    arms.push_back(std::move(a));
  }
  j["arms"] = std::move(arms);
  j["warnings"] = report.warnings;
  return j;
}

nlohmann::ordered_json comparison_to_json(const Comparison& comparison) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["arms"] = comparison.arms;
  ordered_json rows = ordered_json::array();
  for (const auto& row : comparison.rows) {
    ordered_json cells = ordered_json::array();
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
      cells.push_back({{"backend_id", comparison.arms[i]},
                       {"correct", row.cells[i].correct},
                       {"accuracy", row.cells[i].accuracy_pct}});
    }
    rows.push_back({{"bias", identifier_of(row.bias)}, {"cells", std::move(cells)}});
  }
  j["rows"] = std::move(rows);
  return j;
}

std::string render_csv(const EvaluationReport& report) {
  const bool with_arm = report.arms.size() > 1;
  std::string out = with_arm ? "arm,bias,correct,incorrect,accuracy\n" : "bias,correct,incorrect,accuracy\n";
  for (const auto& arm : report.arms) {
    for (const auto& r : arm.rows) {
      if (with_arm) out += arm.backend_id + ",";
      out += fmt::format("{},{},{},{}\n", identifier_of(r.bias), r.correct, r.incorrect, r.accuracy_pct);
    }
  }
  return out;
}

namespace {

constexpr int kLabelWidth = 20;

void append_accuracy(std::string& out, const ArmReport& arm) {
  out += fmt::format("{:<{}} {:>8} {:>10} {:>9} {:>12}\n", "Bias", kLabelWidth, "Correct", "Incorrect", "Accuracy",
                     "Unparseable");
  for (const auto& r : arm.rows) {
    out += fmt::format("{:<{}} {:>8} {:>10} {:>9} {:>12}\n", table_label(r.bias), kLabelWidth, r.correct, r.incorrect,
                       r.accuracy_pct, r.unparseable);
  }
  if (arm.totals) {
    out += fmt::format("{:<{}} {:>8} {:>10} {:>9} {:>12}\n", "Total", kLabelWidth, arm.totals->correct,
                       arm.totals->incorrect, arm.totals->accuracy_pct, arm.unparseable);
  }
}

void append_distribution(std::string& out, const ArmReport& arm) {
  out += fmt::format("{:<{}} {:>8} {:>8} {:>8}\n", "Verdicts", kLabelWidth, "Present", "Absent", "Unclear");
  for (BiasType b : kAllBiases) {
    const auto& c = arm.distribution[bias_index(b)];
    if (c[0] + c[1] + c[2] == 0) continue;
    out += fmt::format("{:<{}} {:>8} {:>8} {:>8}\n", table_label(b), kLabelWidth, c[verdict_index(Verdict::Present)],
                       c[verdict_index(Verdict::Absent)], c[verdict_index(Verdict::Unclear)]);
  }
}

}  // namespace

std::string render_table(const EvaluationReport& report) {
  std::string out = fmt::format("Run {} | judged against {}{} | {} level\n", report.run_id, report.source,
                                report.auto_judged ? " (auto-judged)" : "", report.level);
  for (const auto& arm : report.arms) {
    out += fmt::format("\nArm {} ({} prompt): {} judged, {} unparseable, {} errored\n", arm.backend_id,
                       arm.prompt_mode, arm.judged, arm.unparseable, arm.errored);
    if (!arm.rows.empty()) append_accuracy(out, arm);
    out += "\n";
    append_distribution(out, arm);
  }
  for (const auto& w : report.warnings) out += "\nwarning: " + w + "\n";
  return out;
}

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Csv: return render_csv(report);
    case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
    case ReportFormat::Table: return render_table(report);
  }
  return {};
}

std::string render_comparison(const Comparison& comparison, ReportFormat format) {
  if (format == ReportFormat::Json) return comparison_to_json(comparison).dump(2) + "\n";
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "arm,bias,correct,accuracy\n";
    for (std::size_t a = 0; a < comparison.arms.size(); ++a) {
      for (const auto& row : comparison.rows) {
        out += fmt::format("{},{},{},{}\n", comparison.arms[a], identifier_of(row.bias), row.cells[a].correct,
                           row.cells[a].accuracy_pct);
      }
    }
    return out;
  }
  out = fmt::format("{:<{}}", "Bias", kLabelWidth);
  for (const auto& arm : comparison.arms) out += fmt::format(" {:>18}", arm);
  out += "\n";
  for (const auto& row : comparison.rows) {
    out += fmt::format("{:<{}}", table_label(row.bias), kLabelWidth);
    for (const auto& cell : row.cells) out += fmt::format(" {:>18}", fmt::format("{} ({})", cell.correct, cell.accuracy_pct));
    out += "\n";
  }
  return out;
}

}  // namespace biasscope

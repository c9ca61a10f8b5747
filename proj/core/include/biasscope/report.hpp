#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "biasscope/evaluation.hpp"

namespace biasscope {

enum class ReportFormat { Csv, Json, Table };

std::string_view identifier_of(ReportFormat f) noexcept;
std::optional<ReportFormat> parse_report_format(std::string_view id) noexcept;

// Row label used in tables, e.g. "Confirmation Bias".
std::string_view table_label(BiasType bias) noexcept;

nlohmann::ordered_json report_to_json(const EvaluationReport& report);
nlohmann::ordered_json comparison_to_json(const Comparison& comparison);

// CSV header is bias,correct,incorrect,accuracy; an arm column is prepended
// when the report holds more than one arm.
std::string render_csv(const EvaluationReport& report);
std::string render_table(const EvaluationReport& report);
std::string render_report(const EvaluationReport& report, ReportFormat format);

std::string render_comparison(const Comparison& comparison, ReportFormat format);

}  // namespace biasscope

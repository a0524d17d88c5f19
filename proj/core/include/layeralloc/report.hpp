#pragma once

#include <span>
#include <string>
#include <string_view>

#include "layeralloc/experiment.hpp"

namespace layeralloc {

inline constexpr int kReportSchemaVersion = 1;

enum class ReportFormat { Json, Csv, Markdown };

/// "json", "csv", "md" or "markdown". Throws ContractError otherwise.
ReportFormat parse_report_format(std::string_view text);
std::string_view file_extension(ReportFormat format) noexcept;

inline constexpr std::string_view kCsvHeader =
    "scenario,strategy,D,L,objective_s,makespan_s,stage_max_s,reduction_vs_even_pct";

/// Renders reports deterministically: the same reports always give the same
/// bytes. CSV and markdown have one row per (scenario, strategy).
std::string emit_report(std::span<const ComparisonReport> reports, ReportFormat format);

}  // namespace layeralloc

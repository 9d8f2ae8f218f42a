#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tfheval/metrics.hpp"

namespace tfheval {

enum class ReportFormat { csv, markdown, jsonl_summary };

/// Accepts csv, md, markdown, jsonl and jsonl-summary.
ReportFormat report_format_from_string(std::string_view s);

/// Reads a run-record file and aggregates it. Schema-version mismatches and
/// malformed lines throw std::runtime_error naming the line.
AggregateReport load_report(const std::filesystem::path& records_file);

std::string render_csv(const AggregateReport& report);
std::string render_markdown(const AggregateReport& report);
/// First line is {"metadata": ...}; then one JSON object per row.
std::string render_jsonl_summary(const AggregateReport& report);
std::string render(const AggregateReport& report, ReportFormat format);

/// Grouped bar charts as SVG, tasks on the x axis and one bar per method.
/// Per model: `<model>_metrics.svg` with CrystalBLEU, pass@1 (comp) and
/// pass@1 (func) panels, and `<model>_errors.svg` with wrong-format and
/// repetition rate panels. Returns the files written.
std::vector<std::filesystem::path> write_plots(const AggregateReport& report, const std::filesystem::path& dir);

}  // namespace tfheval

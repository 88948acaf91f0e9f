#pragma once

#include <string>
#include <vector>

#include "predformer/metrics.hpp"

namespace predformer {

enum class ReportFormat { Csv, JsonLines };

// Documented column order shared by the CSV header and the JSON-lines keys.
const std::vector<std::string>& report_columns();

// Writes reports with deterministic field ordering. CSV gets one header row;
// JSON-lines one object per line with the same fields.
void emit_reports(const std::vector<MetricsReport>& reports, const std::string& path, ReportFormat format);

// Parse-back used by round-trip tests and downstream tooling.
std::vector<MetricsReport> parse_reports(const std::string& path, ReportFormat format);

// Per-frame breakdown (frame, mse, mae, ssim) as CSV.
void emit_per_frame_csv(const MetricsReport& report, const std::string& path);

}  // namespace predformer

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fogbus/scenario.hpp"

namespace fogbus {

/// Canonical JSON text of a report: sorted keys, shortest round-trip numbers.
std::string report_to_json(const MetricsReport& report);

/// CSV bodies with a header row and stable column order.
std::string convergence_csv(const std::vector<ConvergenceSeries>& series);
std::string sft_csv(const std::vector<RequestMetrics>& requests);
std::string rrt_csv(const std::vector<RequestMetrics>& requests);
std::string response_csv(const std::vector<RequestMetrics>& requests);

/// Writes report.json, convergence.csv, sft.csv, rrt.csv and response.csv
/// into `out_dir`, creating it if needed. Throws IoError.
std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& out_dir);

/// Writes `text` to `path`. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fogbus

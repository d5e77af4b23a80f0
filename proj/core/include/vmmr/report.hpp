#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmmr/eval.hpp"

namespace vmmr {

enum class ReportFormat { kTableText, kCsv, kSvgHeatmap };

struct EmitOptions {
  // Adds a "Generated:" line to text reports. CSV and SVG never carry one.
  bool timestamps = true;
};

// Model | Accuracy | Recall | Precision, one row per report.
std::string overall_table(std::span<const EvalReport* const> reports);
std::string text_report(const EvalReport& report, const EmitOptions& options = {});

std::string confusion_csv(const EvalReport& report);
std::string per_class_csv(const EvalReport& report);
std::string rank_distribution_csv(const EvalReport& report);
std::string overall_csv(const EvalReport& report);

// Self-contained SVG; cell shade is the count's share of its row.
std::string confusion_svg(const EvalReport& report);

// K-value | Accuracy rows ("Top-1", ...), optionally preceded by a baseline row.
std::string sweep_table(std::span<const SweepRow> rows,
                        std::optional<double> baseline_accuracy = std::nullopt);
std::string sweep_csv(std::span<const SweepRow> rows,
                      std::optional<double> baseline_accuracy = std::nullopt);

// Writes the format's file(s) into dir and returns their paths:
//   text -> report.txt
//   csv  -> confusion.csv, per_class.csv, rank_distribution.csv, overall.csv
//   svg  -> confusion.svg
std::vector<std::filesystem::path> emit_report(const EvalReport& report, ReportFormat format,
                                               const std::filesystem::path& dir,
                                               const EmitOptions& options = {});

}  // namespace vmmr

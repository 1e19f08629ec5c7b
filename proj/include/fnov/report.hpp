#pragma once

#include "fnov/harness.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fnov {

/// Deterministic order: model, property, method.
void sort_rows(std::vector<ResultRow>& rows);

std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::string training_csv(const std::vector<TrainingRow>& rows);
std::vector<TrainingRow> parse_training_csv(const std::string& text);

/// Proof / CE / UC / TO counts per encoding and property, followed by the
/// per-model severity comparison across methods.
std::string summary_table(const std::vector<ResultRow>& rows);

/// SVG charts: severity per model and method for each property, solve time
/// against N split by depth, test MSE per model. Returns the files written;
/// nothing is written for empty input.
std::vector<std::filesystem::path> write_plots(const std::vector<ResultRow>& rows,
                                               const std::vector<TrainingRow>& training,
                                               const std::filesystem::path& dir);

/// results.csv, training.csv, summary.txt and plots under dir.
void write_report(const std::vector<ResultRow>& rows, const std::vector<TrainingRow>& training,
                  const std::filesystem::path& dir);

}  // namespace fnov

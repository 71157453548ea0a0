#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taaco/errors.hpp"

namespace taaco {

/// Practical-impact buckets for mispredictions. Together with "correct" they
/// partition all (predicted, true) label pairs.
enum class ErrorCategory {
  PerformedProhibited,
  SkippedTask,
  UnnecessaryDelayOrDisturbance,
  UnnecessaryInteraction,
};
inline constexpr int kNumErrorCategories = 4;

const char* error_category_name(ErrorCategory category);

struct MetricRow {
  std::string condition;
  int size = 0;
  int fold = -1;  // -1 marks the aggregate over folds
  int points = 0;
  int correct = 0;
  double accuracy = 0.0;
  int explanation_eligible = 0;
  int explanation_hits = 0;
  std::optional<double> explanation_accuracy;  // absent when nothing was eligible
  std::array<int, kNumErrorCategories> error_counts{};
  std::array<double, kNumErrorCategories> error_rates{};
};

struct EvaluationReport {
  int schema_version = 1;
  std::string persona_id;
  uint64_t seed = 0;
  int k = 0;
  std::vector<int> sizes;
  std::vector<MetricRow> rows;

  // Aggregate row (fold == -1) for a condition at a size, if present.
  const MetricRow* aggregate(const std::string& condition, int size) const;

  // Error rates must sum to 1 - accuracy on every row.
  void check_invariants() const;
};

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);
void write_report(const EvaluationReport& report, const std::string& path);
EvaluationReport read_report(const std::string& path);

// Flat tab-separated table (one line per row) for plotting.
std::string report_to_table(const EvaluationReport& report);

// Single report with all rows of the inputs; persona/seed/k must agree.
EvaluationReport merge_reports(const std::vector<EvaluationReport>& reports);

}  // namespace taaco

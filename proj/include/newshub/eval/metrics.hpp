#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "newshub/label.hpp"

namespace newshub::eval {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Errc::input on length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> y_true, std::span<const Label> y_pred);
// Same on raw integers; anything but 0/1 is Errc::input.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct MetricsReport {
  std::string model_name;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // A metric whose denominator is zero is reported as 0 with its flag set.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  ConfusionMatrix cm;
  // Free-form remark shown as a footnote, e.g. for invented defaults.
  std::string note;

  bool operator==(const MetricsReport&) const = default;
};

// Errc::input for an all-zero matrix.
MetricsReport metrics(const ConfusionMatrix& cm, const std::string& model_name);

struct LeaderboardRow {
  MetricsReport report;
  bool best_accuracy = false;
  bool best_precision = false;
  bool best_recall = false;
  bool best_f1 = false;
};

struct Leaderboard {
  std::vector<LeaderboardRow> rows;
};

// Sorted by F1 descending, then accuracy descending, then name. Each column
// maximum is flagged. Errc::input when empty.
Leaderboard leaderboard(std::vector<MetricsReport> reports);

enum class ReportFormat { markdown, csv, json };

// Errc::input for anything but markdown, csv or json.
ReportFormat report_format_from_string(const std::string& name);

struct RenderOptions {
  // Off reproduces the three-column confusion table (TP%, FN%, FP%).
  bool include_tn = true;
  std::string title;
};

// Whole-percent cells "72%" for TP, FN, FP and optionally TN.
std::vector<std::string> confusion_percent_cells(const ConfusionMatrix& cm, bool include_tn = true);

std::string render_report(const Leaderboard& board, ReportFormat format, const RenderOptions& opts = {});

nlohmann::json to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Leaderboard& board);
Leaderboard leaderboard_from_json(const nlohmann::json& j);

}  // namespace newshub::eval

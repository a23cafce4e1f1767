#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aethercast/featsel.hpp"
#include "aethercast/regimes.hpp"

namespace aethercast {

struct WindowScore {
  std::size_t week = 0;
  double mae = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

/// Throws LengthMismatch, NonFinite.
WindowScore score_window(std::span<const double> actual, std::span<const double> pred, std::size_t week = 0);

struct ScoreSummary {
  double mae = 0.0;   // mean of window MAE
  double rmse = 0.0;  // mean of window RMSE
  double pooled_rmse = 0.0;
  std::size_t best_week = 0;
  std::size_t worst_week = 0;
  double best_mae = 0.0;
  double worst_mae = 0.0;
  std::size_t windows = 0;
};

/// Best/worst by MAE, earliest week on ties. Throws EmptyRun.
ScoreSummary aggregate(std::span<const WindowScore> scores);

struct RunReport {
  std::string model;
  std::string regime;
  double alpha = 0.0;
  std::vector<WindowScore> scores;       // corrected predictions
  std::vector<WindowScore> base_scores;  // base predictions
  std::optional<ScoreSummary> summary;
  std::optional<ScoreSummary> base_summary;
  bool partial = false;
  std::optional<std::size_t> failed_week;
  std::string error;
  double seconds = 0.0;
  std::size_t fits = 0;
};

RunReport build_report(const RegimeRun& run, std::string model, std::string regime, double alpha);

std::string scores_csv(std::span<const WindowScore> scores);
std::string forecasts_csv(std::span<const ForecastRecord> records);
/// Loadable by load_csv: timestamp, the actual target and both predictions.
std::string forecast_trace_csv(std::span<const ForecastRecord> records, const std::string& target_name = "pm2_5");
std::string best_worst_svg(const RunReport& report, std::span<const ForecastRecord> records);
std::string relevance_svg(const RelevanceReport& report);

/// Writes scores.csv, forecasts.csv, forecast_trace.csv, manifest.json and
/// best_worst.svg. `extra` is merged into the manifest. Throws IoError.
void emit_report(const RunReport& report, std::span<const ForecastRecord> records,
                 const std::filesystem::path& out_dir, const nlohmann::json& extra = nlohmann::json::object());

nlohmann::json to_json(const RunReport& report);

/// Rebuilds records from a forecasts.csv written by emit_report and the
/// week start times listed in its manifest.
std::vector<ForecastRecord> load_records(const std::filesystem::path& run_dir);

}  // namespace aethercast

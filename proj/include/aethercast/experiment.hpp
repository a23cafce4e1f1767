#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aethercast/config.hpp"
#include "aethercast/featsel.hpp"
#include "aethercast/regimes.hpp"
#include "aethercast/report.hpp"

namespace aethercast {

/// Loads the hourly frame named by the config's data source.
/// Throws InvalidValue when no source is configured.
HourlyFrame load_frame(const ExperimentConfig& cfg);

/// Chronological split; the synthetic source splits exactly at its train
/// length.
ChronoSplit split_frame(const ExperimentConfig& cfg, const HourlyFrame& frame);

std::unique_ptr<Forecaster> make_forecaster(const ExperimentConfig& cfg);

/// Candidates for feature selection: every non-target column, without pm10
/// unless include_pm10 is set.
std::vector<std::string> selection_candidates(const ExperimentConfig& cfg, const HourlyFrame& frame);

/// Relevance of the candidates on the training segment only.
RelevanceReport select_features(const ExperimentConfig& cfg, const HourlyFrame& frame);

struct RunOutcome {
  RunReport report;
  std::vector<ForecastRecord> records;
  std::filesystem::path dir;
};

/// Prepare, run one (model, regime) pair and emit its report into
/// `out_dir`. A run whose first week already fails throws; later failures
/// yield a partial report.
RunOutcome run_experiment(const ExperimentConfig& cfg, const HourlyFrame& frame, const std::filesystem::path& out_dir);
RunOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Writes train.csv / test.csv (winsorized and standardized) and
/// pipeline.json fitted on the training segment.
void prepare_dataset(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// relevance.csv, relevance.svg and selection.json.
RelevanceReport write_selection(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Rebuilds and re-emits a run directory's report from its forecasts.
RunReport reemit_report(const std::filesystem::path& run_dir);

struct BenchCell {
  ModelKind model;
  Regime regime;
  std::optional<RunOutcome> outcome;
  std::string error;
  std::optional<double> reference_mae;
  std::optional<double> reference_rmse;
};

/// Published numbers to compare against: CSV `model,regime,mae,rmse`.
struct ReferenceRow {
  std::string model, regime;
  double mae = 0.0, rmse = 0.0;
};
std::vector<ReferenceRow> load_reference(const std::filesystem::path& path);

/// Every model under walk-forward and frozen-corrected, each cell in its
/// own subdirectory, cells run concurrently. Writes bench.csv and bench.md.
std::vector<BenchCell> run_bench(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                 const std::vector<ReferenceRow>& reference = {});

std::string bench_csv(const std::vector<BenchCell>& cells);
std::string bench_markdown(const std::vector<BenchCell>& cells);

}  // namespace aethercast

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aethercast/additive.hpp"
#include "aethercast/arnet.hpp"
#include "aethercast/preprocess.hpp"
#include "aethercast/sarimax.hpp"
#include "aethercast/series.hpp"

namespace aethercast {

/// A forecasting engine as seen by the regimes. Frames passed in are
/// already preprocessed and hold the target followed by the regressors.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::string tag() const = 0;
  virtual void fit(const HourlyFrame& train) = 0;
  /// One prediction per row of `future`, whose target column is NaN.
  /// `history` ends one hour before `future` starts.
  virtual std::vector<double> forecast(const HourlyFrame& history, const HourlyFrame& future) const = 0;
  virtual nlohmann::json params_json() const = 0;
};

/// Refits warm-start from the previous fit's coefficients when
/// `warm_start` is set.
std::unique_ptr<Forecaster> make_sarimax_forecaster(SarimaxOrder order, SarimaxFitOptions options = {},
                                                    bool warm_start = true);
std::unique_ptr<Forecaster> make_additive_forecaster(AdditiveConfig config = {});
/// Horizons beyond n_forecasts are produced by chaining blocks.
std::unique_ptr<Forecaster> make_arnet_forecaster(ArNetConfig config = {});

enum class Regime { WalkForward, Frozen, FrozenCorrected };
std::string_view regime_name(Regime r) noexcept;
/// Accepts walkforward, frozen, frozen-corrected. Throws InvalidValue.
Regime parse_regime(std::string_view text);

enum class BiasFilter { Ewma, Kalman };

struct RegimeOptions {
  std::vector<std::string> regressors;
  PreprocessOptions preprocess;
  double alpha = 0.3;
  BiasFilter bias_filter = BiasFilter::Ewma;
  double kalman_q = 1.0;
  double kalman_r = 8.0;
};

struct ForecastRecord {
  WeekWindow week;
  std::vector<EpochSeconds> timestamps;
  std::vector<double> actual;  // raw observations
  std::vector<double> base_pred;
  std::vector<double> corrected_pred;
  std::vector<double> residuals;  // actual - base_pred
  double bias = 0.0;
  std::string model_tag;
  std::string regime_tag;
  double fit_seconds = 0.0;
  std::size_t train_rows = 0;
};

struct RegimeRun {
  std::vector<ForecastRecord> records;
  std::size_t fits = 0;
  bool partial = false;
  std::optional<std::size_t> failed_week;
  std::string error;
  double seconds = 0.0;
  PipelineState pipeline;  // last fitted
  nlohmann::json model_params;
};

RegimeRun run_walk_forward(Forecaster& model, const ChronoSplit& split, std::span<const WeekWindow> windows,
                           const RegimeOptions& options);
RegimeRun run_frozen(Forecaster& model, const ChronoSplit& split, std::span<const WeekWindow> windows,
                     const RegimeOptions& options);
RegimeRun run_frozen_corrected(Forecaster& model, const ChronoSplit& split, std::span<const WeekWindow> windows,
                               const RegimeOptions& options);
RegimeRun run_regime(Regime regime, Forecaster& model, const ChronoSplit& split,
                     std::span<const WeekWindow> windows, const RegimeOptions& options);

struct BiasState {
  std::size_t week = 1;
  double bias = 0.0;
  double alpha = 0.3;
};

/// b_{w+1} = alpha * mean_resid + (1 - alpha) * b_w.
BiasState ewma_update(const BiasState& prev, double mean_resid);

/// Scalar random walk observed with noise; the weekly mean residual is the
/// observation.
class KalmanBias {
 public:
  KalmanBias(double state_var, double obs_var);
  double bias() const noexcept { return bias_; }
  void observe(double mean_resid);

 private:
  double q_, r_;
  double bias_ = 0.0;
  double var_ = 0.0;
};

/// Mean of actual - base over a complete week. Throws IncompleteWeek.
double mean_week_residual(const ForecastRecord& record);

std::vector<double> apply_correction(std::span<const double> base, const BiasState& bias);

/// Rewrites corrected predictions of frozen records in week order; the
/// bias for week w only sees residuals of weeks before w.
void correct_records(std::vector<ForecastRecord>& records, const RegimeOptions& options);

}  // namespace aethercast

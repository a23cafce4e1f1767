#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aethercast/series.hpp"

namespace aethercast {

enum class ArNetOptimizer { Sgd, Adam };

struct ArNetConfig {
  int n_lags = 168;
  int n_forecasts = 168;
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 0.001;
  std::uint64_t seed = 42;
  ArNetOptimizer optimizer = ArNetOptimizer::Sgd;
  int daily_order = 6;
  int weekly_order = 3;
  int yearly_order = 6;

  void validate() const;
  int calendar_width() const noexcept { return 2 * (daily_order + weekly_order + yearly_order); }
};

/// Supervised samples over one training frame, materialized on demand.
/// Sample i has its origin at row i + n_lags: lags are rows
/// [origin - n_lags, origin), targets rows [origin, origin + n_forecasts).
///
/// `features` holds one row per hour: calendar Fourier terms, a linear trend
/// term and the regressors. Its weights are shared by all horizons, while the
/// lag block has one weight row per horizon.
struct WindowSet {
  int n_lags = 0;
  int n_forecasts = 0;
  std::vector<double> target;
  Eigen::MatrixXd features;
  EpochSeconds axis_origin = 0;
  double axis_span_seconds = 1.0;

  std::size_t size() const noexcept;
  std::size_t origin(std::size_t sample) const noexcept { return sample + static_cast<std::size_t>(n_lags); }
  std::span<const double> lags(std::size_t sample) const;
  std::span<const double> targets(std::size_t sample) const;
};

/// Throws TooShort when fewer than n_lags + n_forecasts rows are given.
WindowSet make_windows(std::span<const EpochSeconds> timestamps, std::span<const double> y,
                       const Eigen::MatrixXd& exog, const ArNetConfig& cfg);

/// Calendar, trend and regressor features for arbitrary hours.
Eigen::MatrixXd arnet_features(std::span<const EpochSeconds> timestamps, const Eigen::MatrixXd& exog,
                               const ArNetConfig& cfg, EpochSeconds axis_origin, double axis_span_seconds);

struct ArNetParams {
  ArNetConfig config;
  Eigen::MatrixXd lag_weights;     // n_forecasts x n_lags
  Eigen::VectorXd bias;            // n_forecasts
  Eigen::VectorXd shared_weights;  // features width
  double target_mean = 0.0;
  double target_std = 1.0;
  EpochSeconds axis_origin = 0;
  double axis_span_seconds = 1.0;
  std::vector<std::string> regressors;
  std::vector<double> epoch_loss;
};

nlohmann::json to_json(const ArNetParams& params);

/// Seeded initial weights as used by fit_arnet.
ArNetParams init_arnet(const WindowSet& windows, const ArNetConfig& cfg);

struct ArNetGradient {
  Eigen::MatrixXd lag_weights;
  Eigen::VectorXd bias;
  Eigen::VectorXd shared_weights;
};

/// Mean squared error over the listed samples and all horizons, in
/// standardized target units, with its gradient.
double arnet_loss(const ArNetParams& params, const WindowSet& windows, std::span<const std::size_t> samples,
                  ArNetGradient* gradient = nullptr);

/// Mini-batch training. Throws NonFiniteLoss on divergence.
ArNetParams fit_arnet(const WindowSet& windows, const ArNetConfig& cfg,
                      std::vector<std::string> regressor_names = {});

/// One application of the linear map: `lags` are the n_lags values before
/// the first forecast hour; exactly n_forecasts future hours.
std::vector<double> forecast_arnet(const ArNetParams& params, std::span<const double> lags,
                                   std::span<const EpochSeconds> future_timestamps,
                                   const Eigen::MatrixXd& future_exog);

/// Any horizon: consecutive blocks, each taking the previous blocks'
/// predictions as its lags once the supplied history is used up.
std::vector<double> forecast_arnet_chained(const ArNetParams& params, std::span<const double> lags,
                                           std::span<const EpochSeconds> future_timestamps,
                                           const Eigen::MatrixXd& future_exog);

}  // namespace aethercast

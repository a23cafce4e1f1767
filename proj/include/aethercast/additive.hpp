#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aethercast/series.hpp"

namespace aethercast {

inline constexpr int kDailyPeriodHours = 24;
inline constexpr int kWeeklyPeriodHours = 168;
inline constexpr int kYearlyPeriodHours = 8766;

/// A Fourier order of 0 disables that cycle.
struct AdditiveConfig {
  int n_changepoints = 25;
  double changepoint_range = 0.8;
  int daily_order = 4;
  int weekly_order = 3;
  int yearly_order = 10;
  double trend_penalty = 0.5;
  double seasonal_penalty = 0.1;
  double regressor_penalty = 0.1;

  void validate() const;
};

/// Time axis of one fit: t = (ts - origin) / span, so the training rows
/// cover [0, 1]. Changepoints are in the same units.
struct TrendAxis {
  EpochSeconds origin = 0;
  double span_seconds = 1.0;
  std::vector<double> changepoints;

  static TrendAxis fit(std::span<const EpochSeconds> train_timestamps, const AdditiveConfig& cfg);
  double scaled(EpochSeconds t) const noexcept;
};

enum class DesignBlock { Offset, Slope, Changepoint, Seasonal, Regressor };

struct DesignColumn {
  std::string name;
  DesignBlock block;
};

struct AdditiveDesign {
  Eigen::MatrixXd matrix;
  std::vector<DesignColumn> columns;
};

/// Columns: 1, t, relu(t - t_cp) per changepoint, sin/cos pairs for each
/// enabled cycle and harmonic, then one column per regressor. Fourier phase
/// is taken from the hour count since the epoch, so every cycle is exactly
/// periodic in whole hours.
AdditiveDesign build_design_matrix(std::span<const EpochSeconds> timestamps, const Eigen::MatrixXd& exog,
                                   const AdditiveConfig& cfg, const TrendAxis& axis,
                                   std::span<const std::string> regressor_names = {});

struct AdditiveParams {
  AdditiveConfig config;
  TrendAxis axis;
  std::vector<std::string> regressors;
  std::vector<DesignColumn> columns;
  Eigen::VectorXd weights;  // target units

  double offset() const { return weights(0); }
  double slope() const { return weights(1); }
  Eigen::VectorXd deltas() const;
  Eigen::VectorXd seasonal() const;
  Eigen::VectorXd regressor_coefficients() const;
};

nlohmann::json to_json(const AdditiveParams& params);

/// Ridge fit: minimizes (1/n)|y/s - D w|^2 + sum_b lambda_b |w_b|^2 with s =
/// max|y| and no penalty on offset and slope. Throws SingularSystem when the
/// normal equations are not positive definite, TooShort below two weeks.
AdditiveParams fit_additive(std::span<const EpochSeconds> timestamps, std::span<const double> y,
                            const Eigen::MatrixXd& exog, const AdditiveConfig& cfg,
                            std::vector<std::string> regressor_names = {});

struct AdditiveForecast {
  std::vector<double> trend;
  std::vector<double> seasonal;
  std::vector<double> regressors;
  std::vector<double> total;
};

/// Throws DimensionMismatch on a regressor count mismatch.
AdditiveForecast forecast_additive(const AdditiveParams& params, std::span<const EpochSeconds> timestamps,
                                   const Eigen::MatrixXd& exog);

}  // namespace aethercast

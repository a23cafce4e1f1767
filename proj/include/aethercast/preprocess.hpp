#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "aethercast/series.hpp"

namespace aethercast {

/// Linear interpolation between order statistics: h = (n-1)p,
/// q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_linear(std::span<const double> values, double p);

struct ColumnBounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct WinsorBounds {
  double p_lo = 0.01;
  double p_hi = 0.99;
  std::map<std::string, ColumnBounds> bounds;
  /// Columns whose bounds collapsed (constant in the fitting window).
  std::vector<std::string> degenerate;
};

/// Bounds from the given columns of `train` only (all columns when `columns`
/// is empty).
WinsorBounds fit_winsor(const HourlyFrame& train, double p_lo, double p_hi,
                        std::span<const std::string> columns = {});

/// Clamps every covered column to its bounds. Row count is unchanged.
HourlyFrame apply_winsor(const HourlyFrame& frame, const WinsorBounds& bounds);

struct ColumnMoments {
  double mean = 0.0;
  double std = 1.0;
};

/// Per-regressor mean and population standard deviation. Never covers the
/// target column.
struct Standardizer {
  std::map<std::string, ColumnMoments> moments;
};

/// Throws InvalidArgument if `regressors` names the target, ZeroVariance on a
/// constant regressor.
Standardizer fit_standardizer(const HourlyFrame& train, std::span<const std::string> regressors);

/// Throws MissingColumn if a covered column is absent from `frame`.
HourlyFrame apply_standardizer(const HourlyFrame& frame, const Standardizer& s);
HourlyFrame invert_standardizer(const HourlyFrame& frame, const Standardizer& s);

struct PreprocessOptions {
  double p_lo = 0.01;
  double p_hi = 0.99;
  bool winsorize_target = true;
};

/// Everything fitted on one training window.
struct PipelineState {
  WinsorBounds winsor;
  Standardizer standardizer;
  std::vector<std::string> regressors;
  std::string target;
  EpochSeconds fit_start = 0;
  EpochSeconds fit_end = 0;  // exclusive
  bool winsorize_target = true;
};

/// Fits winsor bounds on the target and regressors of `window` and a
/// standardizer on the winsorized regressors.
PipelineState fit_pipeline(const HourlyFrame& window, std::span<const std::string> regressors,
                           const PreprocessOptions& options);

/// Winsorize then standardize; the output keeps only the target and the
/// regressors.
HourlyFrame transform(const PipelineState& state, const HourlyFrame& frame);

/// Perfect-prognosis view of future hours: regressors transformed by the
/// already fitted state, target replaced by NaN so no model can read it.
HourlyFrame future_view(const PipelineState& state, const HourlyFrame& future);

nlohmann::json to_json(const PipelineState& state);

}  // namespace aethercast

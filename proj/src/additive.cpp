#include "aethercast/additive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aethercast/error.hpp"

namespace aethercast {

void AdditiveConfig::validate() const {
  if (n_changepoints < 0) fail(Errc::InvalidValue, "additive: n_changepoints must be >= 0");
  if (!(changepoint_range > 0.0 && changepoint_range < 1.0))
    fail(Errc::InvalidValue, "additive: changepoint_range must lie in (0,1)");
  if (daily_order < 0 || weekly_order < 0 || yearly_order < 0)
    fail(Errc::InvalidValue, "additive: Fourier orders must be >= 0");
  if (!(trend_penalty >= 0.0) || !(seasonal_penalty >= 0.0) || !(regressor_penalty >= 0.0))
    fail(Errc::InvalidValue, "additive: penalties must be >= 0");
}

TrendAxis TrendAxis::fit(std::span<const EpochSeconds> train_timestamps, const AdditiveConfig& cfg) {
  if (train_timestamps.size() < 2) fail(Errc::TooShort, "additive: need at least 2 timestamps");
  TrendAxis axis;
  axis.origin = train_timestamps.front();
  axis.span_seconds = static_cast<double>(train_timestamps.back() - train_timestamps.front());
  for (int j = 1; j <= cfg.n_changepoints; ++j)
    axis.changepoints.push_back(cfg.changepoint_range * j / cfg.n_changepoints);
  return axis;
}

double TrendAxis::scaled(EpochSeconds t) const noexcept {
  return static_cast<double>(t - origin) / span_seconds;
}

namespace {

struct Cycle {
  const char* name;
  int period;
  int order;
};

std::vector<Cycle> cycles(const AdditiveConfig& cfg) {
  return {{"daily", kDailyPeriodHours, cfg.daily_order},
          {"weekly", kWeeklyPeriodHours, cfg.weekly_order},
          {"yearly", kYearlyPeriodHours, cfg.yearly_order}};
}

EpochSeconds floor_mod(EpochSeconds a, EpochSeconds m) {
  const EpochSeconds r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

AdditiveDesign build_design_matrix(std::span<const EpochSeconds> timestamps, const Eigen::MatrixXd& exog,
                                   const AdditiveConfig& cfg, const TrendAxis& axis,
                                   std::span<const std::string> regressor_names) {
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  if (exog.rows() != n)
    fail(Errc::DimensionMismatch, "additive: exog has " + std::to_string(exog.rows()) + " rows for " +
                                      std::to_string(n) + " timestamps");
  AdditiveDesign d;
  d.columns.push_back({"offset", DesignBlock::Offset});
  d.columns.push_back({"slope", DesignBlock::Slope});
  for (std::size_t j = 0; j < axis.changepoints.size(); ++j)
    d.columns.push_back({"delta_" + std::to_string(j + 1), DesignBlock::Changepoint});
  for (const auto& c : cycles(cfg)) {
    for (int k = 1; k <= c.order; ++k) {
      d.columns.push_back({std::string(c.name) + "_sin_" + std::to_string(k), DesignBlock::Seasonal});
      d.columns.push_back({std::string(c.name) + "_cos_" + std::to_string(k), DesignBlock::Seasonal});
    }
  }
  for (Eigen::Index r = 0; r < exog.cols(); ++r) {
    const auto idx = static_cast<std::size_t>(r);
    d.columns.push_back({idx < regressor_names.size() ? regressor_names[idx] : "x" + std::to_string(r + 1),
                         DesignBlock::Regressor});
  }

  d.matrix.resize(n, static_cast<Eigen::Index>(d.columns.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const EpochSeconds ts = timestamps[static_cast<std::size_t>(i)];
    const double t = axis.scaled(ts);
    const EpochSeconds hour = (ts - floor_mod(ts, kSecondsPerHour)) / kSecondsPerHour;
    Eigen::Index col = 0;
    d.matrix(i, col++) = 1.0;
    d.matrix(i, col++) = t;
    for (double cp : axis.changepoints) d.matrix(i, col++) = std::max(0.0, t - cp);
    for (const auto& c : cycles(cfg)) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(floor_mod(hour, c.period)) / c.period;
      for (int k = 1; k <= c.order; ++k) {
        d.matrix(i, col++) = std::sin(k * phase);
        d.matrix(i, col++) = std::cos(k * phase);
      }
    }
    for (Eigen::Index r = 0; r < exog.cols(); ++r) d.matrix(i, col++) = exog(i, r);
  }
  return d;
}

namespace {

Eigen::VectorXd block_of(const AdditiveParams& p, DesignBlock block) {
  std::vector<double> out;
  for (std::size_t i = 0; i < p.columns.size(); ++i)
    if (p.columns[i].block == block) out.push_back(p.weights(static_cast<Eigen::Index>(i)));
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

}  // namespace

Eigen::VectorXd AdditiveParams::deltas() const { return block_of(*this, DesignBlock::Changepoint); }
Eigen::VectorXd AdditiveParams::seasonal() const { return block_of(*this, DesignBlock::Seasonal); }
Eigen::VectorXd AdditiveParams::regressor_coefficients() const {
  return block_of(*this, DesignBlock::Regressor);
}

nlohmann::json to_json(const AdditiveParams& params) {
  nlohmann::json coef = nlohmann::json::object();
  for (std::size_t i = 0; i < params.columns.size(); ++i)
    coef[params.columns[i].name] = params.weights(static_cast<Eigen::Index>(i));
  const auto& c = params.config;
  return {
      {"config",
       {{"n_changepoints", c.n_changepoints},
        {"changepoint_range", c.changepoint_range},
        {"daily_order", c.daily_order},
        {"weekly_order", c.weekly_order},
        {"yearly_order", c.yearly_order},
        {"trend_penalty", c.trend_penalty},
        {"seasonal_penalty", c.seasonal_penalty},
        {"regressor_penalty", c.regressor_penalty}}},
      {"axis_origin", format_iso8601(params.axis.origin)},
      {"axis_span_hours", params.axis.span_seconds / kSecondsPerHour},
      {"changepoints", params.axis.changepoints},
      {"regressors", params.regressors},
      {"coefficients", coef},
  };
}

AdditiveParams fit_additive(std::span<const EpochSeconds> timestamps, std::span<const double> y,
                            const Eigen::MatrixXd& exog, const AdditiveConfig& cfg,
                            std::vector<std::string> regressor_names) {
  cfg.validate();
  if (y.size() != timestamps.size()) fail(Errc::LengthMismatch, "additive: target and timestamps differ");
  if (timestamps.size() < 2 * kHoursPerWeek)
    fail(Errc::TooShort, "additive: need at least two weeks of training data, got " +
                             std::to_string(timestamps.size()) + " hours");
  if (!regressor_names.empty() && regressor_names.size() != static_cast<std::size_t>(exog.cols()))
    fail(Errc::DimensionMismatch, "additive: regressor name count differs from exog columns");

  AdditiveParams params;
  params.config = cfg;
  params.axis = TrendAxis::fit(timestamps, cfg);
  params.regressors = std::move(regressor_names);
  for (Eigen::Index r = static_cast<Eigen::Index>(params.regressors.size()); r < exog.cols(); ++r)
    params.regressors.push_back("x" + std::to_string(r + 1));
  AdditiveDesign design = build_design_matrix(timestamps, exog, cfg, params.axis, params.regressors);
  params.columns = design.columns;

  const auto n = static_cast<Eigen::Index>(y.size());
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), n);
  if (!target.allFinite() || !design.matrix.allFinite())
    fail(Errc::NonFinite, "additive: non-finite training data");
  double scale = target.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;

  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd normal = design.matrix.transpose() * design.matrix * inv_n;
  const Eigen::VectorXd rhs = design.matrix.transpose() * (target / scale) * inv_n;
  for (std::size_t i = 0; i < design.columns.size(); ++i) {
    double lambda = 0.0;
    switch (design.columns[i].block) {
      case DesignBlock::Changepoint: lambda = cfg.trend_penalty; break;
      case DesignBlock::Seasonal: lambda = cfg.seasonal_penalty; break;
      case DesignBlock::Regressor: lambda = cfg.regressor_penalty; break;
      default: break;
    }
    normal(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambda;
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  const Eigen::VectorXd pivots = Eigen::MatrixXd(llt.matrixL()).diagonal();
  if (llt.info() != Eigen::Success ||
      pivots.minCoeff() * pivots.minCoeff() <= 1e-13 * normal.diagonal().maxCoeff())
    fail(Errc::SingularSystem, "additive: normal equations are not positive definite");
  params.weights = llt.solve(rhs) * scale;
  if (!params.weights.allFinite()) fail(Errc::SingularSystem, "additive: solution is not finite");
  return params;
}

AdditiveForecast forecast_additive(const AdditiveParams& params, std::span<const EpochSeconds> timestamps,
                                   const Eigen::MatrixXd& exog) {
  if (static_cast<std::size_t>(exog.cols()) != params.regressors.size())
    fail(Errc::DimensionMismatch, "additive: exog has " + std::to_string(exog.cols()) +
                                      " columns, model expects " + std::to_string(params.regressors.size()));
  const AdditiveDesign d = build_design_matrix(timestamps, exog, params.config, params.axis, params.regressors);
  if (d.matrix.cols() != params.weights.size())
    fail(Errc::DimensionMismatch, "additive: design width differs from fitted weights");
  const auto n = static_cast<std::size_t>(d.matrix.rows());
  AdditiveForecast out;
  out.trend.assign(n, 0.0);
  out.seasonal.assign(n, 0.0);
  out.regressors.assign(n, 0.0);
  out.total.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < params.columns.size(); ++c) {
      const double v = d.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) *
                       params.weights(static_cast<Eigen::Index>(c));
      switch (params.columns[c].block) {
        case DesignBlock::Seasonal: out.seasonal[i] += v; break;
        case DesignBlock::Regressor: out.regressors[i] += v; break;
        default: out.trend[i] += v; break;
      }
    }
    out.total[i] = out.trend[i] + out.seasonal[i] + out.regressors[i];
  }
  return out;
}

}  // namespace aethercast

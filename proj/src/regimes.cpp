#include "aethercast/regimes.hpp"

#include <chrono>
#include <cmath>

#include "aethercast/error.hpp"

namespace aethercast {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::string> regressors_of(const HourlyFrame& f) {
  std::vector<std::string> out;
  for (const auto& n : f.column_names())
    if (n != f.target_name()) out.push_back(n);
  return out;
}

Eigen::MatrixXd exog_matrix(const HourlyFrame& f, std::span<const std::string> names) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(f.rows()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t c = 0; c < names.size(); ++c) {
    const auto col = f.column(names[c]);
    for (std::size_t i = 0; i < col.size(); ++i) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = col[i];
  }
  return x;
}

class SarimaxForecaster final : public Forecaster {
 public:
  SarimaxForecaster(SarimaxOrder order, SarimaxFitOptions options, bool warm)
      : order_(order), options_(std::move(options)), warm_(warm) {}

  std::string tag() const override { return "sarimax"; }

  void fit(const HourlyFrame& train) override {
    names_ = regressors_of(train);
    SarimaxFitOptions opts = options_;
    if (warm_ && params_ && params_->exog_names == names_) opts.warm_start = params_;
    params_ = fit_sarimax(train.target(), exog_matrix(train, names_), order_, opts, names_);
  }

  std::vector<double> forecast(const HourlyFrame& history, const HourlyFrame& future) const override {
    if (!params_) fail(Errc::InvalidArgument, "sarimax: forecast before fit");
    return forecast_sarimax(*params_, history.target(), exog_matrix(history, names_), exog_matrix(future, names_));
  }

  nlohmann::json params_json() const override { return params_ ? to_json(*params_) : nlohmann::json(); }

 private:
  SarimaxOrder order_;
  SarimaxFitOptions options_;
  bool warm_;
  std::vector<std::string> names_;
  std::optional<SarimaxParams> params_;
};

class AdditiveForecaster final : public Forecaster {
 public:
  explicit AdditiveForecaster(AdditiveConfig cfg) : cfg_(cfg) {}

  std::string tag() const override { return "additive"; }

  void fit(const HourlyFrame& train) override {
    names_ = regressors_of(train);
    params_ = fit_additive(train.timestamps(), train.target(), exog_matrix(train, names_), cfg_, names_);
  }

  std::vector<double> forecast(const HourlyFrame&, const HourlyFrame& future) const override {
    if (!params_) fail(Errc::InvalidArgument, "additive: forecast before fit");
    return forecast_additive(*params_, future.timestamps(), exog_matrix(future, names_)).total;
  }

  nlohmann::json params_json() const override { return params_ ? to_json(*params_) : nlohmann::json(); }

 private:
  AdditiveConfig cfg_;
  std::vector<std::string> names_;
  std::optional<AdditiveParams> params_;
};

class ArNetForecaster final : public Forecaster {
 public:
  explicit ArNetForecaster(ArNetConfig cfg) : cfg_(cfg) {}

  std::string tag() const override { return "arnet"; }

  void fit(const HourlyFrame& train) override {
    names_ = regressors_of(train);
    const auto windows = make_windows(train.timestamps(), train.target(), exog_matrix(train, names_), cfg_);
    params_ = fit_arnet(windows, cfg_, names_);
  }

  std::vector<double> forecast(const HourlyFrame& history, const HourlyFrame& future) const override {
    if (!params_) fail(Errc::InvalidArgument, "arnet: forecast before fit");
    const auto lags_needed = static_cast<std::size_t>(cfg_.n_lags);
    if (history.rows() < lags_needed)
      fail(Errc::TooShort, "arnet: history shorter than " + std::to_string(lags_needed) + " lags");
    const auto y = history.target();
    return forecast_arnet_chained(*params_, y.subspan(y.size() - lags_needed), future.timestamps(),
                                  exog_matrix(future, names_));
  }

  nlohmann::json params_json() const override { return params_ ? to_json(*params_) : nlohmann::json(); }

 private:
  ArNetConfig cfg_;
  std::vector<std::string> names_;
  std::optional<ArNetParams> params_;
};

ForecastRecord make_record(const Forecaster& model, Regime regime, const HourlyFrame& rows,
                           const WeekWindow& week, std::vector<double> base) {
  if (base.size() != rows.rows())
    fail(Errc::LengthMismatch, "regimes: model returned " + std::to_string(base.size()) + " values for " +
                                   std::to_string(rows.rows()) + " hours");
  ForecastRecord r;
  r.week = week;
  r.timestamps.assign(rows.timestamps().begin(), rows.timestamps().end());
  const auto actual = rows.target();
  r.actual.assign(actual.begin(), actual.end());
  r.base_pred = std::move(base);
  r.corrected_pred = r.base_pred;
  r.residuals.resize(r.actual.size());
  for (std::size_t i = 0; i < r.actual.size(); ++i) r.residuals[i] = r.actual[i] - r.base_pred[i];
  r.model_tag = model.tag();
  r.regime_tag = std::string(regime_name(regime));
  return r;
}

void mark_failed(RegimeRun& run, std::size_t week, const std::exception& e) {
  run.partial = true;
  run.failed_week = week;
  run.error = "week " + std::to_string(week) + ": " + e.what();
}

}  // namespace

std::unique_ptr<Forecaster> make_sarimax_forecaster(SarimaxOrder order, SarimaxFitOptions options, bool warm_start) {
  order.validate();
  return std::make_unique<SarimaxForecaster>(order, std::move(options), warm_start);
}

std::unique_ptr<Forecaster> make_additive_forecaster(AdditiveConfig config) {
  config.validate();
  return std::make_unique<AdditiveForecaster>(config);
}

std::unique_ptr<Forecaster> make_arnet_forecaster(ArNetConfig config) {
  config.validate();
  return std::make_unique<ArNetForecaster>(config);
}

std::string_view regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::WalkForward: return "walkforward";
    case Regime::Frozen: return "frozen";
    case Regime::FrozenCorrected: return "frozen-corrected";
  }
  return "?";
}

Regime parse_regime(std::string_view text) {
  if (text == "walkforward" || text == "walk-forward") return Regime::WalkForward;
  if (text == "frozen") return Regime::Frozen;
  if (text == "frozen-corrected") return Regime::FrozenCorrected;
  fail(Errc::InvalidValue, "regime must be walkforward, frozen or frozen-corrected, got '" + std::string(text) + "'");
}

RegimeRun run_walk_forward(Forecaster& model, const ChronoSplit& split, std::span<const WeekWindow> windows,
                           const RegimeOptions& options) {
  const auto t0 = Clock::now();
  RegimeRun run;
  for (const auto& week : windows) {
    try {
      const HourlyFrame seen = split.train.concat(split.test.slice(0, week.offset));
      const auto fit_t0 = Clock::now();
      run.pipeline = fit_pipeline(seen, options.regressors, options.preprocess);
      const HourlyFrame prepared = transform(run.pipeline, seen);
      model.fit(prepared);
      ++run.fits;
      const double fit_seconds = since(fit_t0);
      const HourlyFrame rows = window_rows(split.test, week);
      auto base = model.forecast(prepared, future_view(run.pipeline, rows));
      ForecastRecord rec = make_record(model, Regime::WalkForward, rows, week, std::move(base));
      rec.fit_seconds = fit_seconds;
      rec.train_rows = seen.rows();
      run.records.push_back(std::move(rec));
    } catch (const Error& e) {
      mark_failed(run, week.index, e);
      break;
    }
  }
  run.model_params = model.params_json();
  run.seconds = since(t0);
  return run;
}

RegimeRun run_frozen(Forecaster& model, const ChronoSplit& split, std::span<const WeekWindow> windows,
                     const RegimeOptions& options) {
  const auto t0 = Clock::now();
  RegimeRun run;
  if (windows.empty()) return run;
  double fit_seconds = 0.0;
  std::vector<double> all;
  HourlyFrame span_rows;
  try {
    run.pipeline = fit_pipeline(split.train, options.regressors, options.preprocess);
    const HourlyFrame prepared = transform(run.pipeline, split.train);
    model.fit(prepared);
    ++run.fits;
    fit_seconds = since(t0);
    const auto& last = windows.back();
    span_rows = split.test.slice(windows.front().offset, last.offset + last.horizon_hours);
    all = model.forecast(prepared, future_view(run.pipeline, span_rows));
    if (all.size() != span_rows.rows())
      fail(Errc::LengthMismatch, "regimes: model returned " + std::to_string(all.size()) + " values for " +
                                     std::to_string(span_rows.rows()) + " hours");
  } catch (const Error& e) {
    mark_failed(run, windows.front().index, e);
    run.seconds = since(t0);
    return run;
  }
  const std::size_t base_offset = windows.front().offset;
  for (const auto& week : windows) {
    const HourlyFrame rows = window_rows(split.test, week);
    const auto begin = all.begin() + static_cast<std::ptrdiff_t>(week.offset - base_offset);
    std::vector<double> base(begin, begin + static_cast<std::ptrdiff_t>(week.horizon_hours));
    bool finite = true;
    for (double v : base) finite = finite && std::isfinite(v);
    if (!finite) {
      mark_failed(run, week.index, Error(Errc::NonFinite, "regimes: non-finite forecast"));
      break;
    }
    ForecastRecord rec = make_record(model, Regime::Frozen, rows, week, std::move(base));
    rec.fit_seconds = run.records.empty() ? fit_seconds : 0.0;
    rec.train_rows = split.train.rows();
    run.records.push_back(std::move(rec));
  }
  run.model_params = model.params_json();
  run.seconds = since(t0);
  return run;
}

RegimeRun run_frozen_corrected(Forecaster& model, const ChronoSplit& split, std::span<const WeekWindow> windows,
                               const RegimeOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    fail(Errc::InvalidValue, "regimes: alpha must lie in (0,1)");
  RegimeRun run = run_frozen(model, split, windows, options);
  correct_records(run.records, options);
  return run;
}

RegimeRun run_regime(Regime regime, Forecaster& model, const ChronoSplit& split,
                     std::span<const WeekWindow> windows, const RegimeOptions& options) {
  switch (regime) {
    case Regime::WalkForward: return run_walk_forward(model, split, windows, options);
    case Regime::Frozen: return run_frozen(model, split, windows, options);
    case Regime::FrozenCorrected: return run_frozen_corrected(model, split, windows, options);
  }
  fail(Errc::InvalidArgument, "regimes: unknown regime");
}

BiasState ewma_update(const BiasState& prev, double mean_resid) {
  return {prev.week + 1, prev.alpha * mean_resid + (1.0 - prev.alpha) * prev.bias, prev.alpha};
}

KalmanBias::KalmanBias(double state_var, double obs_var) : q_(state_var), r_(obs_var) {
  if (!(q_ > 0.0) || !(r_ > 0.0)) fail(Errc::InvalidValue, "regimes: Kalman bias variances must be > 0");
}

void KalmanBias::observe(double mean_resid) {
  const double prior = var_ + q_;
  const double gain = prior / (prior + r_);
  bias_ += gain * (mean_resid - bias_);
  var_ = (1.0 - gain) * prior;
}

double mean_week_residual(const ForecastRecord& record) {
  if (record.actual.size() != kHoursPerWeek || record.base_pred.size() != kHoursPerWeek)
    fail(Errc::IncompleteWeek, "regimes: week " + std::to_string(record.week.index) + " has " +
                                   std::to_string(record.actual.size()) + " observed hours");
  double sum = 0.0;
  for (std::size_t i = 0; i < kHoursPerWeek; ++i) sum += record.actual[i] - record.base_pred[i];
  return sum / static_cast<double>(kHoursPerWeek);
}

std::vector<double> apply_correction(std::span<const double> base, const BiasState& bias) {
  std::vector<double> out(base.begin(), base.end());
  for (double& v : out) v += bias.bias;
  return out;
}

void correct_records(std::vector<ForecastRecord>& records, const RegimeOptions& options) {
  BiasState state{1, 0.0, options.alpha};
  std::optional<KalmanBias> kalman;
  if (options.bias_filter == BiasFilter::Kalman) kalman.emplace(options.kalman_q, options.kalman_r);
  for (auto& rec : records) {
    if (kalman) state.bias = kalman->bias();
    rec.bias = state.bias;
    rec.corrected_pred = apply_correction(rec.base_pred, state);
    rec.regime_tag = std::string(regime_name(Regime::FrozenCorrected));
    const double resid = mean_week_residual(rec);
    if (kalman) {
      kalman->observe(resid);
      ++state.week;
    } else {
      state = ewma_update(state, resid);
    }
  }
}

}  // namespace aethercast

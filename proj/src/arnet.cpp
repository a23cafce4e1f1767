#include "aethercast/arnet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "aethercast/additive.hpp"
#include "aethercast/error.hpp"

namespace aethercast {

void ArNetConfig::validate() const {
  if (n_lags < 1 || n_forecasts < 1) fail(Errc::InvalidValue, "arnet: n_lags and n_forecasts must be >= 1");
  if (epochs < 1 || batch_size < 1) fail(Errc::InvalidValue, "arnet: epochs and batch_size must be >= 1");
  if (!(learning_rate > 0.0)) fail(Errc::InvalidValue, "arnet: learning_rate must be > 0");
  if (daily_order < 0 || weekly_order < 0 || yearly_order < 0)
    fail(Errc::InvalidValue, "arnet: Fourier orders must be >= 0");
}

std::size_t WindowSet::size() const noexcept {
  const auto need = static_cast<std::size_t>(n_lags + n_forecasts);
  return target.size() < need ? 0 : target.size() - need + 1;
}

std::span<const double> WindowSet::lags(std::size_t sample) const {
  return std::span<const double>(target).subspan(sample, static_cast<std::size_t>(n_lags));
}

std::span<const double> WindowSet::targets(std::size_t sample) const {
  return std::span<const double>(target).subspan(origin(sample), static_cast<std::size_t>(n_forecasts));
}

Eigen::MatrixXd arnet_features(std::span<const EpochSeconds> timestamps, const Eigen::MatrixXd& exog,
                               const ArNetConfig& cfg, EpochSeconds axis_origin, double axis_span_seconds) {
  const auto n = static_cast<Eigen::Index>(timestamps.size());
  if (exog.rows() != n) fail(Errc::DimensionMismatch, "arnet: exog rows differ from timestamps");
  const struct {
    int period, order;
  } cycles[] = {{kDailyPeriodHours, cfg.daily_order},
                {kWeeklyPeriodHours, cfg.weekly_order},
                {kYearlyPeriodHours, cfg.yearly_order}};
  Eigen::MatrixXd f(n, cfg.calendar_width() + 1 + exog.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const EpochSeconds ts = timestamps[static_cast<std::size_t>(i)];
    const EpochSeconds hour = ts / kSecondsPerHour - (ts % kSecondsPerHour < 0 ? 1 : 0);
    Eigen::Index col = 0;
    for (const auto& c : cycles) {
      const EpochSeconds r = ((hour % c.period) + c.period) % c.period;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(r) / c.period;
      for (int k = 1; k <= c.order; ++k) {
        f(i, col++) = std::sin(k * phase);
        f(i, col++) = std::cos(k * phase);
      }
    }
    f(i, col++) = static_cast<double>(ts - axis_origin) / axis_span_seconds;
    for (Eigen::Index r = 0; r < exog.cols(); ++r) f(i, col++) = exog(i, r);
  }
  return f;
}

WindowSet make_windows(std::span<const EpochSeconds> timestamps, std::span<const double> y,
                       const Eigen::MatrixXd& exog, const ArNetConfig& cfg) {
  cfg.validate();
  if (y.size() != timestamps.size()) fail(Errc::LengthMismatch, "arnet: target and timestamps differ");
  const auto need = static_cast<std::size_t>(cfg.n_lags + cfg.n_forecasts);
  if (y.size() < need)
    fail(Errc::TooShort, "arnet: need at least " + std::to_string(need) + " rows, got " + std::to_string(y.size()));
  WindowSet w;
  w.n_lags = cfg.n_lags;
  w.n_forecasts = cfg.n_forecasts;
  w.target.assign(y.begin(), y.end());
  w.axis_origin = timestamps.front();
  w.axis_span_seconds = std::max<double>(static_cast<double>(timestamps.back() - timestamps.front()), 1.0);
  w.features = arnet_features(timestamps, exog, cfg, w.axis_origin, w.axis_span_seconds);
  return w;
}

nlohmann::json to_json(const ArNetParams& p) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index h = 0; h < p.lag_weights.rows(); ++h) {
    const Eigen::RowVectorXd row = p.lag_weights.row(h);
    rows.emplace_back(row.data(), row.data() + row.size());
  }
  const auto& c = p.config;
  return {
      {"config",
       {{"n_lags", c.n_lags},
        {"n_forecasts", c.n_forecasts},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"learning_rate", c.learning_rate},
        {"seed", c.seed},
        {"optimizer", c.optimizer == ArNetOptimizer::Adam ? "adam" : "sgd"},
        {"daily_order", c.daily_order},
        {"weekly_order", c.weekly_order},
        {"yearly_order", c.yearly_order}}},
      {"target_mean", p.target_mean},
      {"target_std", p.target_std},
      {"axis_origin", format_iso8601(p.axis_origin)},
      {"axis_span_hours", p.axis_span_seconds / kSecondsPerHour},
      {"regressors", p.regressors},
      {"bias", std::vector<double>(p.bias.data(), p.bias.data() + p.bias.size())},
      {"shared_weights",
       std::vector<double>(p.shared_weights.data(), p.shared_weights.data() + p.shared_weights.size())},
      {"lag_weights", rows},
      {"epoch_loss", p.epoch_loss},
  };
}

ArNetParams init_arnet(const WindowSet& windows, const ArNetConfig& cfg) {
  ArNetParams p;
  p.config = cfg;
  p.axis_origin = windows.axis_origin;
  p.axis_span_seconds = windows.axis_span_seconds;
  const auto n = static_cast<double>(windows.target.size());
  const double mean = std::accumulate(windows.target.begin(), windows.target.end(), 0.0) / n;
  double var = 0.0;
  for (double v : windows.target) var += (v - mean) * (v - mean);
  p.target_mean = mean;
  p.target_std = var > 0.0 ? std::sqrt(var / n) : 1.0;

  std::mt19937_64 rng(cfg.seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.n_lags));
  std::uniform_real_distribution<double> init(-bound, bound);
  p.lag_weights.resize(cfg.n_forecasts, cfg.n_lags);
  for (Eigen::Index h = 0; h < p.lag_weights.rows(); ++h)
    for (Eigen::Index l = 0; l < p.lag_weights.cols(); ++l) p.lag_weights(h, l) = init(rng);
  p.bias = Eigen::VectorXd::Zero(cfg.n_forecasts);
  p.shared_weights = Eigen::VectorXd::Zero(windows.features.cols());
  return p;
}

namespace {

// Standardized lags (rows = samples) and targets for a batch.
void gather(const ArNetParams& p, const WindowSet& w, std::span<const std::size_t> samples, Eigen::MatrixXd& lags,
            Eigen::MatrixXd& targets) {
  const auto b = static_cast<Eigen::Index>(samples.size());
  lags.resize(b, w.n_lags);
  targets.resize(b, w.n_forecasts);
  const double inv = 1.0 / p.target_std;
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto s = samples[static_cast<std::size_t>(i)];
    const auto lag = w.lags(s);
    const auto tgt = w.targets(s);
    for (Eigen::Index l = 0; l < w.n_lags; ++l) lags(i, l) = (lag[static_cast<std::size_t>(l)] - p.target_mean) * inv;
    for (Eigen::Index h = 0; h < w.n_forecasts; ++h)
      targets(i, h) = (tgt[static_cast<std::size_t>(h)] - p.target_mean) * inv;
  }
}

}  // namespace

double arnet_loss(const ArNetParams& p, const WindowSet& w, std::span<const std::size_t> samples,
                  ArNetGradient* gradient) {
  if (samples.empty()) return 0.0;
  if (p.shared_weights.size() != w.features.cols() || p.lag_weights.cols() != w.n_lags ||
      p.lag_weights.rows() != w.n_forecasts)
    fail(Errc::DimensionMismatch, "arnet: parameter shapes do not match the windows");
  Eigen::MatrixXd lags, targets;
  gather(p, w, samples, lags, targets);
  const auto b = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index horizon = w.n_forecasts;
  Eigen::MatrixXd pred = lags * p.lag_weights.transpose();
  pred.rowwise() += p.bias.transpose();
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto o = static_cast<Eigen::Index>(w.origin(samples[static_cast<std::size_t>(i)]));
    pred.row(i) += (w.features.middleRows(o, horizon) * p.shared_weights).transpose();
  }
  const Eigen::MatrixXd err = pred - targets;
  const double count = static_cast<double>(b * horizon);
  const double loss = err.squaredNorm() / count;
  if (gradient) {
    const Eigen::MatrixXd r = err * (2.0 / count);
    gradient->lag_weights = r.transpose() * lags;
    gradient->bias = r.colwise().sum().transpose();
    gradient->shared_weights = Eigen::VectorXd::Zero(p.shared_weights.size());
    for (Eigen::Index i = 0; i < b; ++i) {
      const auto o = static_cast<Eigen::Index>(w.origin(samples[static_cast<std::size_t>(i)]));
      gradient->shared_weights.noalias() += w.features.middleRows(o, horizon).transpose() * r.row(i).transpose();
    }
  }
  return loss;
}

ArNetParams fit_arnet(const WindowSet& windows, const ArNetConfig& cfg, std::vector<std::string> regressor_names) {
  cfg.validate();
  if (windows.n_lags != cfg.n_lags || windows.n_forecasts != cfg.n_forecasts)
    fail(Errc::DimensionMismatch, "arnet: windows were built with a different configuration");
  const std::size_t n = windows.size();
  if (n == 0) fail(Errc::TooShort, "arnet: no training samples");
  ArNetParams p = init_arnet(windows, cfg);
  p.regressors = std::move(regressor_names);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  // Adam moments
  ArNetGradient m{Eigen::MatrixXd::Zero(p.lag_weights.rows(), p.lag_weights.cols()),
                  Eigen::VectorXd::Zero(p.bias.size()), Eigen::VectorXd::Zero(p.shared_weights.size())};
  ArNetGradient v = m;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;

  ArNetGradient g;
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::span<const std::size_t> idx(order.data() + begin, std::min(batch, n - begin));
      const double loss = arnet_loss(p, windows, idx, &g);
      if (!std::isfinite(loss))
        fail(Errc::NonFiniteLoss, "arnet: loss diverged in epoch " + std::to_string(epoch + 1));
      total += loss * static_cast<double>(idx.size());
      if (cfg.optimizer == ArNetOptimizer::Sgd) {
        p.lag_weights -= cfg.learning_rate * g.lag_weights;
        p.bias -= cfg.learning_rate * g.bias;
        p.shared_weights -= cfg.learning_rate * g.shared_weights;
      } else {
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        auto adam = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
          mom = beta1 * mom + (1.0 - beta1) * grad;
          vel = beta2 * vel + (1.0 - beta2) * grad.cwiseProduct(grad);
          param.array() -= cfg.learning_rate * (mom.array() / c1) / ((vel.array() / c2).sqrt() + eps);
        };
        adam(p.lag_weights, m.lag_weights, v.lag_weights, g.lag_weights);
        adam(p.bias, m.bias, v.bias, g.bias);
        adam(p.shared_weights, m.shared_weights, v.shared_weights, g.shared_weights);
      }
    }
    p.epoch_loss.push_back(total / static_cast<double>(n));
  }
  if (!p.lag_weights.allFinite() || !p.shared_weights.allFinite() || !p.bias.allFinite())
    fail(Errc::NonFiniteLoss, "arnet: weights are not finite after training");
  return p;
}

std::vector<double> forecast_arnet(const ArNetParams& p, std::span<const double> lags,
                                   std::span<const EpochSeconds> future_timestamps,
                                   const Eigen::MatrixXd& future_exog) {
  const auto horizon = static_cast<std::size_t>(p.config.n_forecasts);
  if (lags.size() != static_cast<std::size_t>(p.config.n_lags))
    fail(Errc::DimensionMismatch, "arnet: expected " + std::to_string(p.config.n_lags) + " lags, got " +
                                      std::to_string(lags.size()));
  if (future_timestamps.size() != horizon)
    fail(Errc::DimensionMismatch, "arnet: expected " + std::to_string(horizon) + " future hours, got " +
                                      std::to_string(future_timestamps.size()));
  const Eigen::MatrixXd f =
      arnet_features(future_timestamps, future_exog, p.config, p.axis_origin, p.axis_span_seconds);
  if (f.cols() != p.shared_weights.size())
    fail(Errc::DimensionMismatch, "arnet: future regressors have " + std::to_string(future_exog.cols()) +
                                      " columns, model expects " + std::to_string(p.regressors.size()));
  if (!f.allFinite()) fail(Errc::NonFinite, "arnet: non-finite future regressors");
  Eigen::VectorXd z(p.config.n_lags);
  for (Eigen::Index l = 0; l < z.size(); ++l) z(l) = (lags[static_cast<std::size_t>(l)] - p.target_mean) / p.target_std;
  const Eigen::VectorXd pred = p.lag_weights * z + p.bias + f * p.shared_weights;
  std::vector<double> out(horizon);
  for (std::size_t h = 0; h < horizon; ++h) out[h] = pred(static_cast<Eigen::Index>(h)) * p.target_std + p.target_mean;
  return out;
}

std::vector<double> forecast_arnet_chained(const ArNetParams& p, std::span<const double> lags,
                                           std::span<const EpochSeconds> future_timestamps,
                                           const Eigen::MatrixXd& future_exog) {
  const auto horizon = static_cast<std::size_t>(p.config.n_forecasts);
  const auto n_lags = static_cast<std::size_t>(p.config.n_lags);
  if (lags.size() != n_lags)
    fail(Errc::DimensionMismatch, "arnet: expected " + std::to_string(n_lags) + " lags, got " +
                                      std::to_string(lags.size()));
  if (static_cast<std::size_t>(future_exog.rows()) != future_timestamps.size())
    fail(Errc::DimensionMismatch, "arnet: future regressor rows differ from future hours");
  std::vector<double> series(lags.begin(), lags.end());
  std::vector<double> out;
  out.reserve(future_timestamps.size());
  for (std::size_t start = 0; start < future_timestamps.size(); start += horizon) {
    const std::size_t len = std::min(horizon, future_timestamps.size() - start);
    // The final block may be short; pad with hours past the request.
    std::vector<EpochSeconds> ts(horizon);
    Eigen::MatrixXd exog = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(horizon), future_exog.cols());
    for (std::size_t h = 0; h < horizon; ++h) {
      ts[h] = future_timestamps[start] + static_cast<EpochSeconds>(h) * kSecondsPerHour;
      if (h < len) exog.row(static_cast<Eigen::Index>(h)) = future_exog.row(static_cast<Eigen::Index>(start + h));
    }
    const std::span<const double> recent(series.data() + series.size() - n_lags, n_lags);
    const auto block = forecast_arnet(p, recent, ts, exog);
    for (std::size_t h = 0; h < len; ++h) {
      out.push_back(block[h]);
      series.push_back(block[h]);
    }
  }
  return out;
}

}  // namespace aethercast

#include "aethercast/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aethercast/error.hpp"

namespace aethercast {

double quantile_linear(std::span<const double> values, double p) {
  if (values.empty()) fail(Errc::InvalidArgument, "preprocess: quantile of empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

WinsorBounds fit_winsor(const HourlyFrame& train, double p_lo, double p_hi,
                        std::span<const std::string> columns) {
  if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 1.0))
    fail(Errc::InvalidArgument, "preprocess: need 0 <= p_lo < p_hi <= 1");
  if (train.rows() < 2) fail(Errc::TooShort, "preprocess: winsor fit needs at least 2 rows");
  WinsorBounds out;
  out.p_lo = p_lo;
  out.p_hi = p_hi;
  const auto& names = columns.empty() ? std::span<const std::string>(train.column_names()) : columns;
  for (const auto& name : names) {
    const auto col = train.column(name);
    ColumnBounds b{quantile_linear(col, p_lo), quantile_linear(col, p_hi)};
    if (b.lo == b.hi) out.degenerate.push_back(name);
    out.bounds.emplace(name, b);
  }
  return out;
}

HourlyFrame apply_winsor(const HourlyFrame& frame, const WinsorBounds& bounds) {
  HourlyFrame out = frame;
  for (const auto& [name, b] : bounds.bounds) {
    if (!frame.has_column(name)) continue;
    const auto col = frame.column(name);
    std::vector<double> clipped(col.begin(), col.end());
    for (double& v : clipped) v = std::min(std::max(v, b.lo), b.hi);
    out = out.with_column(name, std::move(clipped));
  }
  return out;
}

Standardizer fit_standardizer(const HourlyFrame& train, std::span<const std::string> regressors) {
  Standardizer s;
  for (const auto& name : regressors) {
    if (name == train.target_name())
      fail(Errc::InvalidArgument, "preprocess: target '" + name + "' must stay in original units");
    const auto col = train.column(name);
    const double n = static_cast<double>(col.size());
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) fail(Errc::ZeroVariance, "preprocess: regressor '" + name + "' is constant");
    s.moments.emplace(name, ColumnMoments{mean, sd});
  }
  return s;
}

HourlyFrame apply_standardizer(const HourlyFrame& frame, const Standardizer& s) {
  HourlyFrame out = frame;
  for (const auto& [name, m] : s.moments) {
    const auto col = frame.column(name);
    std::vector<double> z(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) z[i] = (col[i] - m.mean) / m.std;
    out = out.with_column(name, std::move(z));
  }
  return out;
}

HourlyFrame invert_standardizer(const HourlyFrame& frame, const Standardizer& s) {
  HourlyFrame out = frame;
  for (const auto& [name, m] : s.moments) {
    const auto col = frame.column(name);
    std::vector<double> v(col.size());
    for (std::size_t i = 0; i < col.size(); ++i) v[i] = col[i] * m.std + m.mean;
    out = out.with_column(name, std::move(v));
  }
  return out;
}

PipelineState fit_pipeline(const HourlyFrame& window, std::span<const std::string> regressors,
                           const PreprocessOptions& options) {
  PipelineState state;
  state.regressors.assign(regressors.begin(), regressors.end());
  state.target = window.target_name();
  state.fit_start = window.start();
  state.fit_end = window.end();
  state.winsorize_target = options.winsorize_target;

  std::vector<std::string> clip = state.regressors;
  if (options.winsorize_target) clip.insert(clip.begin(), state.target);
  state.winsor = fit_winsor(window, options.p_lo, options.p_hi, clip);
  state.standardizer = fit_standardizer(apply_winsor(window, state.winsor), state.regressors);
  return state;
}

namespace {

HourlyFrame keep_model_columns(const PipelineState& state, const HourlyFrame& frame) {
  std::vector<std::string> keep{state.target};
  keep.insert(keep.end(), state.regressors.begin(), state.regressors.end());
  return frame.select(keep);
}

}  // namespace

HourlyFrame transform(const PipelineState& state, const HourlyFrame& frame) {
  return apply_standardizer(apply_winsor(keep_model_columns(state, frame), state.winsor),
                            state.standardizer);
}

HourlyFrame future_view(const PipelineState& state, const HourlyFrame& future) {
  const HourlyFrame t = transform(state, future);
  return t.with_column(state.target,
                       std::vector<double>(t.rows(), std::numeric_limits<double>::quiet_NaN()));
}

nlohmann::json to_json(const PipelineState& state) {
  nlohmann::json j;
  j["target"] = state.target;
  j["regressors"] = state.regressors;
  j["fit_start"] = format_iso8601(state.fit_start);
  j["fit_end"] = format_iso8601(state.fit_end);
  j["winsorize_target"] = state.winsorize_target;
  j["percentiles"] = {{"lo", state.winsor.p_lo}, {"hi", state.winsor.p_hi}};
  auto& bounds = j["bounds"] = nlohmann::json::object();
  for (const auto& [name, b] : state.winsor.bounds) bounds[name] = {{"lo", b.lo}, {"hi", b.hi}};
  j["degenerate"] = state.winsor.degenerate;
  auto& means = j["means"] = nlohmann::json::object();
  auto& stds = j["stds"] = nlohmann::json::object();
  for (const auto& [name, m] : state.standardizer.moments) {
    means[name] = m.mean;
    stds[name] = m.std;
  }
  return j;
}

}  // namespace aethercast

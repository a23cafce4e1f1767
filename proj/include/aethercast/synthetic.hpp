#pragma once

#include <cstddef>
#include <cstdint>

#include "aethercast/series.hpp"

namespace aethercast {

/// Hourly series with every canonical column. The target is
///   level + slope * t + daily and weekly sinusoids + N(0, noise_sd^2)
///   + shift for t >= train_hours,
/// plus `regressor_effect` times the centred no2 series.
struct SyntheticSpec {
  EpochSeconds start = 1'640'995'200;  // 2022-01-01T00:00:00Z
  std::size_t train_hours = 8760;
  std::size_t test_weeks = 8;
  double level = 80.0;
  double slope_per_hour = 0.002;
  double daily_amplitude = 15.0;
  double weekly_amplitude = 8.0;
  double noise_sd = 10.0;
  double level_shift = 50.0;
  double regressor_effect = 0.0;
  std::uint64_t seed = 1;
};

HourlyFrame make_synthetic(const SyntheticSpec& spec);

/// Split ratio whose floor lands exactly on spec.train_hours.
double synthetic_ratio(const SyntheticSpec& spec);

}  // namespace aethercast

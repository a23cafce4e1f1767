#include "aethercast/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "aethercast/ingest.hpp"

namespace aethercast {

namespace {

struct Ar1 {
  double mean, sd, phi, state = 0.0;
  double next(std::mt19937_64& rng, std::normal_distribution<double>& n01) {
    state = phi * state + std::sqrt(1.0 - phi * phi) * n01(rng);
    return mean + sd * state;
  }
};

}  // namespace

HourlyFrame make_synthetic(const SyntheticSpec& spec) {
  const std::size_t n = spec.train_hours + spec.test_weeks * kHoursPerWeek;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> n01;
  constexpr double tau = 2.0 * std::numbers::pi;

  Ar1 no{15.0, 6.0, 0.9}, no2{40.0, 12.0, 0.9}, co{800.0, 200.0, 0.9}, so2{10.0, 3.0, 0.9};
  std::vector<EpochSeconds> ts(n);
  std::vector<std::vector<double>> cols(kCanonicalColumns.size(), std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = spec.start + static_cast<EpochSeconds>(i) * kSecondsPerHour;
    const double hour = static_cast<double>((ts[i] / kSecondsPerHour) % 24);
    const double how = static_cast<double>((ts[i] / kSecondsPerHour) % 168);
    const double hoy = static_cast<double>((ts[i] / kSecondsPerHour) % 8766);
    const double x_no = no.next(rng, n01), x_no2 = no2.next(rng, n01), x_co = co.next(rng, n01),
                 x_so2 = so2.next(rng, n01);
    double pm = spec.level + spec.slope_per_hour * static_cast<double>(i) +
                spec.daily_amplitude * std::sin(tau * hour / 24.0) +
                spec.weekly_amplitude * std::sin(tau * how / 168.0) + spec.noise_sd * n01(rng) +
                spec.regressor_effect * (x_no2 - no2.mean);
    if (i >= spec.train_hours) pm += spec.level_shift;
    const double temp = 12.0 + 12.0 * std::sin(tau * hoy / 8766.0) + 5.0 * std::sin(tau * hour / 24.0) + n01(rng);
    cols[0][i] = pm;
    cols[1][i] = 1.4 * pm + 5.0 * n01(rng);
    cols[2][i] = x_co;
    cols[3][i] = x_no;
    cols[4][i] = x_no2;
    cols[5][i] = x_so2;
    cols[6][i] = 60.0 + 30.0 * std::sin(tau * (hour - 6.0) / 24.0) + 5.0 * n01(rng);
    cols[7][i] = 5.0 + n01(rng);
    cols[8][i] = temp;
    cols[9][i] = temp - 6.0 + n01(rng);
  }
  return HourlyFrame(std::move(ts), kCanonicalColumns, std::move(cols));
}

double synthetic_ratio(const SyntheticSpec& spec) {
  const double n = static_cast<double>(spec.train_hours + spec.test_weeks * kHoursPerWeek);
  return (static_cast<double>(spec.train_hours) + 0.5) / n;
}

}  // namespace aethercast

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "aethercast/error.hpp"
#include "aethercast/preprocess.hpp"

using namespace aethercast;

namespace {

constexpr EpochSeconds kT0 = 1'672'531'200;

HourlyFrame frame_of(std::vector<std::string> names, std::vector<std::vector<double>> cols) {
  std::vector<EpochSeconds> ts(cols.front().size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = kT0 + static_cast<EpochSeconds>(i) * kSecondsPerHour;
  return HourlyFrame(ts, std::move(names), std::move(cols));
}

HourlyFrame noisy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> ln(3.0, 0.8);
  std::normal_distribution<double> n01;
  std::vector<double> y(n), a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = ln(rng);
    a[i] = 10.0 + 3.0 * n01(rng);
    b[i] = ln(rng);
  }
  return frame_of({"pm2_5", "no2", "co"}, {y, a, b});
}

/// Sort-then-interpolate reference, written independently of the library.
double oracle_quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

const std::vector<std::string> kRegs{"no2", "co"};

}  // namespace

TEST_CASE("winsor bounds use linear interpolation") {
  std::vector<double> c(100);
  std::iota(c.begin(), c.end(), 1.0);
  const auto f = frame_of({"pm2_5"}, {c});
  const auto b = fit_winsor(f, 0.01, 0.99);
  CHECK(b.bounds.at("pm2_5").lo == doctest::Approx(1.99).epsilon(1e-12));
  CHECK(b.bounds.at("pm2_5").hi == doctest::Approx(99.01).epsilon(1e-12));

  const auto g = noisy(977, 4);
  for (double p : {0.0, 0.01, 0.37, 0.99, 1.0}) {
    const auto col = g.column("co");
    CHECK(quantile_linear(col, p) == doctest::Approx(oracle_quantile({col.begin(), col.end()}, p)).epsilon(1e-14));
  }

  const auto flat = frame_of({"pm2_5"}, {{5.0, 5.0, 5.0}});
  const auto fb = fit_winsor(flat, 0.01, 0.99);
  CHECK(fb.bounds.at("pm2_5").lo == 5.0);
  CHECK(fb.bounds.at("pm2_5").hi == 5.0);
  CHECK(fb.degenerate == std::vector<std::string>{"pm2_5"});

  const auto full = fit_winsor(g, 0.0, 1.0);
  CHECK(apply_winsor(g, full) == g);
  CHECK_THROWS_AS(fit_winsor(g, 0.5, 0.4), Error);
}

TEST_CASE("winsor clamps and is idempotent") {
  WinsorBounds b;
  b.bounds["pm2_5"] = {2.0, 99.0};
  const auto f = frame_of({"pm2_5"}, {{150.0, 50.0, -3.0}});
  const auto w = apply_winsor(f, b);
  CHECK(w.target()[0] == 99.0);
  CHECK(w.target()[1] == 50.0);
  CHECK(w.target()[2] == 2.0);
  CHECK(apply_winsor(w, b) == w);
  CHECK(w.rows() == f.rows());
}

TEST_CASE("standardizer") {
  const auto two = frame_of({"pm2_5", "no2"}, {{1.0, 1.0}, {0.0, 2.0}});
  const std::vector<std::string> one{"no2"};
  const auto s = fit_standardizer(two, one);
  CHECK(s.moments.at("no2").mean == 1.0);
  CHECK(s.moments.at("no2").std == 1.0);
  const std::vector<std::string> tgt{"pm2_5"};
  CHECK_THROWS_AS(fit_standardizer(two, tgt), Error);
  const auto flat = frame_of({"pm2_5", "no2"}, {{1.0, 2.0}, {3.0, 3.0}});
  try {
    fit_standardizer(flat, one);
    FAIL("expected ZeroVariance");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroVariance);
  }

  const auto g = noisy(500, 7);
  const auto st = fit_standardizer(g, kRegs);
  const auto z = apply_standardizer(g, st);
  for (const auto& name : kRegs) {
    const auto col = z.column(name);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / 500.0;
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt(var / 500.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(z.target()[3] == g.target()[3]);
  const auto back = invert_standardizer(z, st);
  for (const auto& name : kRegs)
    for (std::size_t i = 0; i < 500; ++i)
      CHECK(std::abs(back.column(name)[i] - g.column(name)[i]) <= 1e-12 * std::abs(g.column(name)[i]) + 1e-12);

  Standardizer identity;
  identity.moments["no2"] = {0.0, 1.0};
  CHECK(apply_standardizer(g, identity) == g);
  const auto missing = frame_of({"pm2_5"}, {{1.0, 2.0}});
  try {
    apply_standardizer(missing, st);
    FAIL("expected MissingColumn");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingColumn);
  }
}

TEST_CASE("test segment is transformed without refitting") {
  const auto g = noisy(1000, 9);
  const auto train = g.slice(0, 800), test = g.slice(800, 1000);
  const auto state = fit_pipeline(train, kRegs, {});
  const auto zt = transform(state, test);
  const auto col = zt.column("no2");
  const double mean = std::accumulate(col.begin(), col.end(), 0.0) / 200.0;
  CHECK(mean != 0.0);
  const auto fut = future_view(state, test);
  for (double v : fut.target()) CHECK(std::isnan(v));
  CHECK(fut.column("co")[5] == zt.column("co")[5]);
}

TEST_CASE("fitted state ignores anything outside the fitting window") {
  const auto g = noisy(1000, 12);
  const auto train = g.slice(0, 800);
  const auto a = fit_pipeline(train, kRegs, {});
  auto wild = std::vector<double>(g.column("co").begin(), g.column("co").end());
  for (std::size_t i = 800; i < 1000; ++i) wild[i] *= 1e6;
  const auto perturbed = g.with_column("co", wild);
  const auto b = fit_pipeline(perturbed.slice(0, 800), kRegs, {});
  CHECK(to_json(a) == to_json(b));
  CHECK(a.fit_end == g.timestamps()[800]);

  // Expanding windows: each state depends only on rows before its end.
  for (std::size_t end : {600u, 700u, 800u}) {
    const auto base = fit_pipeline(g.slice(0, end), kRegs, {});
    auto later = std::vector<double>(g.target().begin(), g.target().end());
    for (std::size_t i = end; i < later.size(); ++i) later[i] = -1e9;
    const auto alt = fit_pipeline(g.with_column("pm2_5", later).slice(0, end), kRegs, {});
    CHECK(to_json(base) == to_json(alt));
  }
}

TEST_CASE("target winsorization switch") {
  const auto g = noisy(800, 13);
  PreprocessOptions off;
  off.winsorize_target = false;
  const auto s = fit_pipeline(g, kRegs, off);
  CHECK(transform(s, g).target()[0] == g.target()[0]);
  const auto on = fit_pipeline(g, kRegs, {});
  const auto clipped = transform(on, g);
  const auto y = clipped.target();
  const double hi = on.winsor.bounds.at("pm2_5").hi;
  for (double v : y) CHECK(v <= hi);
  const auto j = to_json(on);
  for (const char* key : {"bounds", "means", "stds", "percentiles"}) CHECK(j.contains(key));
}

#include <doctest.h>

#include "aethercast/error.hpp"
#include "aethercast/series.hpp"

using namespace aethercast;

namespace {

constexpr EpochSeconds kT0 = 1'672'531'200;  // 2023-01-01T00:00:00Z

HourlyFrame ramp(std::size_t n) {
  std::vector<EpochSeconds> ts(n);
  std::vector<double> y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts[i] = kT0 + static_cast<EpochSeconds>(i) * kSecondsPerHour;
    y[i] = static_cast<double>(i);
    x[i] = 2.0 * static_cast<double>(i);
  }
  return HourlyFrame(ts, {"pm2_5", "no2"}, {y, x});
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("grid enforcement") {
  RawTable ok{{kT0, kT0 + 3600, kT0 + 7200}, {"pm2_5"}, {{1.0, 2.0, 3.0}}};
  const auto f = enforce_hourly_grid(ok);
  CHECK(f.rows() == 3);
  CHECK(enforce_hourly_grid(RawTable{{f.timestamps().begin(), f.timestamps().end()}, {"pm2_5"},
                                     {{f.target().begin(), f.target().end()}}}) == f);

  RawTable shuffled{{kT0 + 7200, kT0, kT0 + 3600}, {"pm2_5"}, {{3.0, 1.0, 2.0}}};
  const auto s = enforce_hourly_grid(shuffled);
  CHECK(s == f);

  RawTable gap{{kT0, kT0 + 7200}, {"pm2_5"}, {{1.0, 3.0}}};
  CHECK(code_of([&] { enforce_hourly_grid(gap); }) == Errc::GridGap);
  RawTable dup{{kT0, kT0, kT0 + 3600}, {"pm2_5"}, {{1.0, 1.0, 2.0}}};
  CHECK(code_of([&] { enforce_hourly_grid(dup); }) == Errc::DuplicateTimestamp);
  RawTable off{{kT0 + 60, kT0 + 3660}, {"pm2_5"}, {{1.0, 2.0}}};
  CHECK(code_of([&] { enforce_hourly_grid(off); }) == Errc::OffGrid);
  RawTable single{{kT0}, {"pm2_5"}, {{1.0}}};
  CHECK_THROWS_AS(enforce_hourly_grid(single), Error);
}

TEST_CASE("chronological split") {
  const auto f = ramp(100);
  const auto s = chrono_split(f, 0.9);
  CHECK(s.train.rows() == 90);
  CHECK(s.test.rows() == 10);
  CHECK(s.train.timestamps().back() < s.test.timestamps().front());
  CHECK(s.train.concat(s.test) == f);

  const auto half = chrono_split(ramp(10), 0.5);
  CHECK(half.train.rows() == 5);
  CHECK(half.test.target()[0] == 5.0);

  CHECK(code_of([&] { chrono_split(ramp(10), 0.05); }) == Errc::EmptySegment);
  CHECK_THROWS_AS(chrono_split(f, 1.0), Error);
  CHECK_THROWS_AS(chrono_split(f, 0.0), Error);

  const auto big = chrono_split(ramp(39'700), 0.9);
  CHECK(big.test.rows() == 3'970);
  CHECK(weekly_windows(big.test).size() == 23);
}

TEST_CASE("weekly windows") {
  CHECK(weekly_windows(ramp(336)).size() == 2);
  const auto test = ramp(400);
  const auto windows = weekly_windows(test);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].index == 1);
  CHECK(windows[1].start == windows[0].start + 168 * kSecondsPerHour);
  CHECK(weekly_windows(ramp(100)).empty());

  std::vector<double> joined;
  for (const auto& w : windows) {
    const auto rows = window_rows(test, w);
    CHECK(rows.rows() == 168);
    joined.insert(joined.end(), rows.target().begin(), rows.target().end());
  }
  const auto head = test.slice(0, 336);
  const auto prefix = head.target();
  CHECK(std::equal(joined.begin(), joined.end(), prefix.begin(), prefix.end()));
}

TEST_CASE("frame accessors and transforms") {
  const auto f = ramp(5);
  CHECK(f.cols() == 2);
  CHECK(f.end() == kT0 + 5 * kSecondsPerHour);
  CHECK(f.column("no2")[4] == 8.0);
  CHECK(code_of([&] { f.column("o3"); }) == Errc::MissingColumn);
  const std::vector<std::string> keep{"no2"};
  const auto sel = f.select(keep);
  CHECK(sel.cols() == 1);
  const auto replaced = f.with_column("no2", {0, 0, 0, 0, 0});
  CHECK(replaced.column("no2")[3] == 0.0);
  const auto added = f.with_column("o3", {1, 1, 1, 1, 1});
  CHECK(added.cols() == 3);
  CHECK_THROWS_AS(f.concat(f), Error);
  CHECK_THROWS_AS(HourlyFrame({kT0}, {"a", "a"}, {{1.0}, {2.0}}), Error);
}

TEST_CASE("ISO timestamps") {
  CHECK(format_iso8601(kT0) == "2023-01-01T00:00:00Z");
  CHECK(parse_iso8601("2023-01-01T00:00:00Z") == kT0);
  CHECK(parse_iso8601(format_iso8601(kT0 + 12345 * 3600)) == kT0 + 12345 * 3600);
  CHECK_THROWS_AS(parse_iso8601("yesterday"), Error);
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aethercast {

/// Seconds since the Unix epoch, UTC.
using EpochSeconds = std::int64_t;

inline constexpr EpochSeconds kSecondsPerHour = 3600;
inline constexpr std::size_t kHoursPerWeek = 168;

/// `YYYY-MM-DDTHH:00:00Z`. Minutes and seconds are always printed, so any
/// instant round-trips.
std::string format_iso8601(EpochSeconds t);

/// Accepts `YYYY-MM-DDTHH:MM:SSZ`, `YYYY-MM-DDTHH:MM:SS`, `YYYY-MM-DDTHH:MM`
/// and `YYYY-MM-DD` (midnight). Always interpreted as UTC.
EpochSeconds parse_iso8601(std::string_view text);

/// Timestamped columns before grid enforcement. Rows may be in any order.
struct RawTable {
  std::vector<EpochSeconds> timestamps;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

/// Timestamp-indexed multivariate hourly table.
///
/// Invariants, checked on construction: timestamps lie on hour boundaries
/// and advance by exactly one hour, every column has one value per
/// timestamp, column names are unique. Instances are immutable.
class HourlyFrame {
 public:
  HourlyFrame() = default;
  HourlyFrame(std::vector<EpochSeconds> timestamps, std::vector<std::string> names,
              std::vector<std::vector<double>> columns, std::string target_name = "pm2_5");

  std::size_t rows() const noexcept { return timestamps_.size(); }
  std::size_t cols() const noexcept { return names_.size(); }
  bool empty() const noexcept { return timestamps_.empty(); }

  std::span<const EpochSeconds> timestamps() const noexcept { return timestamps_; }
  EpochSeconds start() const;
  /// One hour past the last row.
  EpochSeconds end() const;

  const std::vector<std::string>& column_names() const noexcept { return names_; }
  const std::string& target_name() const noexcept { return target_; }
  bool has_column(std::string_view name) const noexcept;
  std::size_t column_index(std::string_view name) const;
  std::span<const double> column(std::string_view name) const;
  std::span<const double> column(std::size_t index) const { return columns_.at(index); }
  std::span<const double> target() const { return column(target_); }

  /// Rows [begin, end).
  HourlyFrame slice(std::size_t begin, std::size_t end) const;
  /// This frame followed by `next`, which must start one hour after the last
  /// row and carry the same columns.
  HourlyFrame concat(const HourlyFrame& next) const;
  HourlyFrame select(std::span<const std::string> names) const;
  HourlyFrame with_column(std::string_view name, std::vector<double> values) const;
  HourlyFrame with_target(std::string target_name) const;

  friend bool operator==(const HourlyFrame&, const HourlyFrame&) = default;

 private:
  std::vector<EpochSeconds> timestamps_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::string target_ = "pm2_5";
};

/// Sorts rows by timestamp and verifies the hourly grid.
/// Throws DuplicateTimestamp, GridGap or OffGrid.
HourlyFrame enforce_hourly_grid(RawTable raw, std::string target_name = "pm2_5");

struct ChronoSplit {
  HourlyFrame train;
  HourlyFrame test;
  double ratio = 0.0;
};

/// First floor(ratio * N) rows train, the rest test.
ChronoSplit chrono_split(const HourlyFrame& frame, double ratio);

struct WeekWindow {
  std::size_t index = 0;  // 1-based
  EpochSeconds start = 0;
  std::size_t horizon_hours = kHoursPerWeek;
  std::size_t offset = 0;  // first row within the test frame
};

/// Consecutive, non-overlapping 168-hour windows over `test`. A trailing
/// partial week is dropped.
std::vector<WeekWindow> weekly_windows(const HourlyFrame& test);

/// Rows of `test` covered by `window`.
HourlyFrame window_rows(const HourlyFrame& test, const WeekWindow& window);

}  // namespace aethercast

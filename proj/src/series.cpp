#include "aethercast/series.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "aethercast/error.hpp"

namespace aethercast {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateTimestamp: return "DuplicateTimestamp";
    case Errc::GridGap: return "GridGap";
    case Errc::OffGrid: return "OffGrid";
    case Errc::EmptySegment: return "EmptySegment";
    case Errc::HttpError: return "HttpError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::RangeEmpty: return "RangeEmpty";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyIntersection: return "EmptyIntersection";
    case Errc::ColumnCollision: return "ColumnCollision";
    case Errc::MissingApiKey: return "MissingApiKey";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::TooShort: return "TooShort";
    case Errc::NumericalDivergence: return "NumericalDivergence";
    case Errc::OptimizerFailure: return "OptimizerFailure";
    case Errc::NonFiniteObjective: return "NonFiniteObjective";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::IncompleteWeek: return "IncompleteWeek";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::NonFinite: return "NonFinite";
    case Errc::EmptyRun: return "EmptyRun";
    case Errc::IoError: return "IoError";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

using namespace std::chrono;

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    fail(Errc::ParseError, "bad timestamp '" + std::string(whole) + "'");
  return value;
}

}  // namespace

std::string format_iso8601(EpochSeconds t) {
  const sys_seconds tp{seconds{t}};
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const hh_mm_ss hms{tp - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

EpochSeconds parse_iso8601(std::string_view text) {
  const std::string_view whole = text;
  if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) text.remove_suffix(1);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-')
    fail(Errc::ParseError, "bad timestamp '" + std::string(whole) + "'");
  const int y = parse_int(text.substr(0, 4), whole);
  const int mo = parse_int(text.substr(5, 2), whole);
  const int d = parse_int(text.substr(8, 2), whole);
  int hh = 0, mm = 0, ss = 0;
  if (text.size() > 10) {
    if ((text[10] != 'T' && text[10] != ' ') || text.size() < 16 || text[13] != ':')
      fail(Errc::ParseError, "bad timestamp '" + std::string(whole) + "'");
    hh = parse_int(text.substr(11, 2), whole);
    mm = parse_int(text.substr(14, 2), whole);
    if (text.size() > 16) {
      if (text.size() != 19 || text[16] != ':')
        fail(Errc::ParseError, "bad timestamp '" + std::string(whole) + "'");
      ss = parse_int(text.substr(17, 2), whole);
    }
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60)
    fail(Errc::ParseError, "bad timestamp '" + std::string(whole) + "'");
  const auto tp = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
  return tp.time_since_epoch().count();
}

HourlyFrame::HourlyFrame(std::vector<EpochSeconds> timestamps, std::vector<std::string> names,
                         std::vector<std::vector<double>> columns, std::string target_name)
    : timestamps_(std::move(timestamps)),
      names_(std::move(names)),
      columns_(std::move(columns)),
      target_(std::move(target_name)) {
  if (names_.size() != columns_.size())
    fail(Errc::DimensionMismatch, "series: " + std::to_string(names_.size()) + " names for " +
                                      std::to_string(columns_.size()) + " columns");
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    if (!seen.insert(names_[c]).second)
      fail(Errc::ColumnCollision, "series: duplicate column '" + names_[c] + "'");
    if (columns_[c].size() != timestamps_.size())
      fail(Errc::LengthMismatch, "series: column '" + names_[c] + "' has " +
                                     std::to_string(columns_[c].size()) + " values for " +
                                     std::to_string(timestamps_.size()) + " timestamps");
  }
  for (std::size_t i = 0; i < timestamps_.size(); ++i) {
    if (timestamps_[i] % kSecondsPerHour != 0)
      fail(Errc::OffGrid, "series: " + format_iso8601(timestamps_[i]) + " is not on an hour boundary");
    if (i == 0) continue;
    const EpochSeconds step = timestamps_[i] - timestamps_[i - 1];
    if (step == 0) fail(Errc::DuplicateTimestamp, "series: " + format_iso8601(timestamps_[i]));
    if (step != kSecondsPerHour)
      fail(Errc::GridGap, "series: " + format_iso8601(timestamps_[i - 1]) + " -> " +
                              format_iso8601(timestamps_[i]));
  }
}

EpochSeconds HourlyFrame::start() const {
  if (empty()) fail(Errc::EmptySegment, "series: start() of empty frame");
  return timestamps_.front();
}

EpochSeconds HourlyFrame::end() const {
  if (empty()) fail(Errc::EmptySegment, "series: end() of empty frame");
  return timestamps_.back() + kSecondsPerHour;
}

bool HourlyFrame::has_column(std::string_view name) const noexcept {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t HourlyFrame::column_index(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) fail(Errc::MissingColumn, "series: no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names_.begin());
}

std::span<const double> HourlyFrame::column(std::string_view name) const {
  return columns_[column_index(name)];
}

HourlyFrame HourlyFrame::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows())
    fail(Errc::InvalidArgument, "series: slice [" + std::to_string(begin) + ", " +
                                    std::to_string(end) + ") of " + std::to_string(rows()) + " rows");
  std::vector<std::vector<double>> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.emplace_back(c.begin() + begin, c.begin() + end);
  return HourlyFrame({timestamps_.begin() + begin, timestamps_.begin() + end}, names_,
                     std::move(cols), target_);
}

HourlyFrame HourlyFrame::concat(const HourlyFrame& next) const {
  if (next.empty()) return *this;
  if (empty()) return next.with_target(target_);
  if (next.names_ != names_) fail(Errc::DimensionMismatch, "series: concat with different columns");
  auto ts = timestamps_;
  ts.insert(ts.end(), next.timestamps_.begin(), next.timestamps_.end());
  auto cols = columns_;
  for (std::size_t c = 0; c < cols.size(); ++c)
    cols[c].insert(cols[c].end(), next.columns_[c].begin(), next.columns_[c].end());
  return HourlyFrame(std::move(ts), names_, std::move(cols), target_);
}

HourlyFrame HourlyFrame::select(std::span<const std::string> names) const {
  std::vector<std::vector<double>> cols;
  cols.reserve(names.size());
  for (const auto& n : names) cols.push_back(columns_[column_index(n)]);
  return HourlyFrame(timestamps_, {names.begin(), names.end()}, std::move(cols), target_);
}

HourlyFrame HourlyFrame::with_column(std::string_view name, std::vector<double> values) const {
  auto names = names_;
  auto cols = columns_;
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) {
    names.emplace_back(name);
    cols.push_back(std::move(values));
  } else {
    cols[static_cast<std::size_t>(it - names.begin())] = std::move(values);
  }
  return HourlyFrame(timestamps_, std::move(names), std::move(cols), target_);
}

HourlyFrame HourlyFrame::with_target(std::string target_name) const {
  HourlyFrame copy = *this;
  copy.target_ = std::move(target_name);
  return copy;
}

HourlyFrame enforce_hourly_grid(RawTable raw, std::string target_name) {
  const std::size_t n = raw.timestamps.size();
  if (n < 2) fail(Errc::TooShort, "series: need at least 2 rows, got " + std::to_string(n));
  for (const auto& c : raw.columns)
    if (c.size() != n) fail(Errc::LengthMismatch, "series: ragged raw table");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw.timestamps[a] < raw.timestamps[b];
  });
  if (std::is_sorted(order.begin(), order.end()))
    return HourlyFrame(std::move(raw.timestamps), std::move(raw.names), std::move(raw.columns),
                       std::move(target_name));

  std::vector<EpochSeconds> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = raw.timestamps[order[i]];
  std::vector<std::vector<double>> cols(raw.columns.size(), std::vector<double>(n));
  for (std::size_t c = 0; c < raw.columns.size(); ++c)
    for (std::size_t i = 0; i < n; ++i) cols[c][i] = raw.columns[c][order[i]];
  return HourlyFrame(std::move(ts), std::move(raw.names), std::move(cols), std::move(target_name));
}

ChronoSplit chrono_split(const HourlyFrame& frame, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    fail(Errc::InvalidArgument, "series: split ratio must lie in (0,1), got " + std::to_string(ratio));
  const std::size_t n = frame.rows();
  const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (n_train == 0 || n_train == n)
    fail(Errc::EmptySegment, "series: split of " + std::to_string(n) + " rows at ratio " +
                                 std::to_string(ratio) + " leaves an empty segment");
  return ChronoSplit{frame.slice(0, n_train), frame.slice(n_train, n), ratio};
}

std::vector<WeekWindow> weekly_windows(const HourlyFrame& test) {
  std::vector<WeekWindow> out;
  const std::size_t count = test.rows() / kHoursPerWeek;
  out.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t offset = w * kHoursPerWeek;
    out.push_back(WeekWindow{w + 1, test.timestamps()[offset], kHoursPerWeek, offset});
  }
  return out;
}

HourlyFrame window_rows(const HourlyFrame& test, const WeekWindow& window) {
  return test.slice(window.offset, window.offset + window.horizon_hours);
}

}  // namespace aethercast

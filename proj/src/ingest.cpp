#include "aethercast/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "aethercast/error.hpp"

namespace aethercast {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) fail(Errc::IoError, "ingest: cannot format number");
  return std::string(buf.data(), ptr);
}

void SourceConfig::validate() const {
  if (!(start < end))
    fail(Errc::InvalidArgument, "ingest: range end " + format_iso8601(end) +
                                    " is not after start " + format_iso8601(start));
  if (!(latitude >= -90.0 && latitude <= 90.0))
    fail(Errc::InvalidArgument, "ingest: latitude " + std::to_string(latitude) + " out of range");
  if (!(longitude >= -180.0 && longitude <= 180.0))
    fail(Errc::InvalidArgument, "ingest: longitude " + std::to_string(longitude) + " out of range");
}

void write_text_file(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot open '" + tmp.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(Errc::IoError, "write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(Errc::IoError, "rename '" + tmp.string() + "': " + ec.message());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (text.empty()) return false;
  if (text == "nan" || text == "NaN") {
    out = std::nan("");
    return true;
  }
  const char* first = text.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

std::string http_get(const std::string& base_url, const std::string& path_and_query) {
  httplib::Client client(base_url);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  client.set_follow_location(true);
  auto res = client.Get(path_and_query);
  if (!res)
    fail(Errc::HttpError, "ingest: request to " + base_url + " failed (" +
                              httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    fail(Errc::HttpError, "ingest: " + base_url + " returned status " + std::to_string(res->status));
  return res->body;
}

std::string cache_key(std::string_view provider, const SourceConfig& cfg) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.*s|%.6f|%.6f|%lld|%lld", static_cast<int>(provider.size()),
                provider.data(), cfg.latitude, cfg.longitude, static_cast<long long>(cfg.start),
                static_cast<long long>(cfg.end));
  return buf;
}

std::string cached_get(std::string_view provider, const SourceConfig& cfg, const std::string& base,
                       const std::string& path) {
  const ResponseCache cache(cfg.cache_dir);
  const std::string key = cache_key(provider, cfg);
  if (auto hit = cache.load(key)) return *std::move(hit);
  std::string body = http_get(base, path);
  cache.store(key, body);
  return body;
}

std::string date_only(EpochSeconds t) { return format_iso8601(t).substr(0, 10); }

void require_full_coverage(const HourlyFrame& frame, EpochSeconds start, EpochSeconds end,
                           std::string_view provider) {
  const auto expected = static_cast<std::size_t>((end - start) / kSecondsPerHour);
  if (frame.rows() != expected || frame.start() != start)
    fail(Errc::SchemaError, std::string(provider) + ": expected " + std::to_string(expected) +
                                " hourly rows from " + format_iso8601(start) + ", got " +
                                std::to_string(frame.rows()));
}

}  // namespace

HourlyFrame load_csv(const fs::path& path, std::string target_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "ingest: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "ingest: " + path.string() + ":1: missing header");
  const auto header = split_fields(trim(line));
  if (header.empty() || trim(header[0]) != "timestamp")
    fail(Errc::ParseError, "ingest: " + path.string() + ":1: first column must be 'timestamp'");

  RawTable raw;
  for (std::size_t c = 1; c < header.size(); ++c) raw.names.emplace_back(trim(header[c]));
  raw.columns.resize(raw.names.size());

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != header.size())
      fail(Errc::ParseError, "ingest: " + where + ": expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
    try {
      raw.timestamps.push_back(parse_iso8601(trim(fields[0])));
    } catch (const Error&) {
      fail(Errc::ParseError, "ingest: " + where + ": bad timestamp '" + std::string(fields[0]) + "'");
    }
    for (std::size_t c = 1; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        fail(Errc::ParseError, "ingest: " + where + ": column '" + raw.names[c - 1] +
                                   "' is not numeric: '" + std::string(fields[c]) + "'");
      raw.columns[c - 1].push_back(v);
    }
  }
  return enforce_hourly_grid(std::move(raw), std::move(target_name));
}

void save_csv(const HourlyFrame& frame, const fs::path& path) {
  std::string out = "timestamp";
  for (const auto& n : frame.column_names()) out += "," + n;
  out += "\n";
  const auto ts = frame.timestamps();
  for (std::size_t i = 0; i < frame.rows(); ++i) {
    out += format_iso8601(ts[i]);
    for (std::size_t c = 0; c < frame.cols(); ++c) {
      out += ',';
      out += format_number(frame.column(c)[i]);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

HourlyFrame merge_align(std::span<const HourlyFrame> frames, std::string target_name) {
  if (frames.empty()) fail(Errc::EmptyIntersection, "ingest: nothing to merge");
  std::unordered_set<std::string> seen;
  for (const auto& f : frames)
    for (const auto& n : f.column_names())
      if (!seen.insert(n).second) fail(Errc::ColumnCollision, "ingest: column '" + n + "' appears twice");

  EpochSeconds lo = std::numeric_limits<EpochSeconds>::min();
  EpochSeconds hi = std::numeric_limits<EpochSeconds>::max();
  for (const auto& f : frames) {
    if (f.empty()) fail(Errc::EmptyIntersection, "ingest: an input frame has no rows");
    lo = std::max(lo, f.start());
    hi = std::min(hi, f.end());
  }
  if (lo >= hi) fail(Errc::EmptyIntersection, "ingest: input frames share no timestamps");

  const auto n = static_cast<std::size_t>((hi - lo) / kSecondsPerHour);
  std::vector<EpochSeconds> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = lo + static_cast<EpochSeconds>(i) * kSecondsPerHour;
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  for (const auto& f : frames) {
    const auto offset = static_cast<std::size_t>((lo - f.start()) / kSecondsPerHour);
    for (std::size_t c = 0; c < f.cols(); ++c) {
      names.push_back(f.column_names()[c]);
      const auto src = f.column(c);
      cols.emplace_back(src.begin() + static_cast<std::ptrdiff_t>(offset),
                        src.begin() + static_cast<std::ptrdiff_t>(offset + n));
    }
  }
  return HourlyFrame(std::move(ts), std::move(names), std::move(cols), std::move(target_name));
}

std::string ResponseCache::digest(std::string_view key) {
  // FNV-1a, 64-bit: stable across platforms and runs.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

fs::path ResponseCache::path_for(std::string_view key) const { return dir_ / (digest(key) + ".json"); }

std::optional<std::string> ResponseCache::load(std::string_view key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void ResponseCache::store(std::string_view key, std::string_view payload) const {
  write_text_file(path_for(key), payload);
}

HourlyFrame parse_air_pollution_payload(std::string_view text, EpochSeconds start, EpochSeconds end) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::SchemaError, std::string("air-pollution: payload is not JSON: ") + e.what());
  }
  if (!doc.contains("list") || !doc["list"].is_array())
    fail(Errc::SchemaError, "air-pollution: payload has no 'list' array");

  RawTable raw;
  raw.names = kPollutantColumns;
  raw.columns.resize(raw.names.size());
  for (const auto& entry : doc["list"]) {
    if (!entry.contains("dt") || !entry["dt"].is_number_integer())
      fail(Errc::SchemaError, "air-pollution: entry without integer 'dt'");
    const auto dt = entry["dt"].get<EpochSeconds>();
    if (dt < start || dt >= end) continue;
    if (!entry.contains("components") || !entry["components"].is_object())
      fail(Errc::SchemaError, "air-pollution: entry at " + format_iso8601(dt) + " has no 'components'");
    const auto& comp = entry["components"];
    for (std::size_t c = 0; c < raw.names.size(); ++c) {
      if (!comp.contains(raw.names[c]) || !comp[raw.names[c]].is_number())
        fail(Errc::SchemaError, "air-pollution: entry at " + format_iso8601(dt) + " lacks '" +
                                    raw.names[c] + "'");
      raw.columns[c].push_back(comp[raw.names[c]].get<double>());
    }
    raw.timestamps.push_back(dt);
  }
  if (raw.timestamps.empty())
    fail(Errc::RangeEmpty, "air-pollution: no rows in [" + format_iso8601(start) + ", " +
                               format_iso8601(end) + ")");
  HourlyFrame frame = raw.timestamps.size() == 1
                          ? HourlyFrame(raw.timestamps, raw.names, raw.columns)
                          : enforce_hourly_grid(std::move(raw));
  require_full_coverage(frame, start, end, "air-pollution");
  return frame;
}

HourlyFrame parse_meteo_payload(std::string_view text, EpochSeconds start, EpochSeconds end) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::SchemaError, std::string("meteo: payload is not JSON: ") + e.what());
  }
  if (!doc.contains("hourly") || !doc["hourly"].is_object())
    fail(Errc::SchemaError, "meteo: payload has no 'hourly' object");
  const auto& hourly = doc["hourly"];
  static constexpr std::array<std::pair<const char*, const char*>, 2> kFields = {
      {{"temperature_2m", "temperature"}, {"dew_point_2m", "dew_point"}}};
  for (const char* key : {"time", kFields[0].first, kFields[1].first})
    if (!hourly.contains(key) || !hourly[key].is_array())
      fail(Errc::SchemaError, std::string("meteo: 'hourly' lacks array '") + key + "'");
  const auto& time = hourly["time"];
  for (const auto& [key, _] : kFields)
    if (hourly[key].size() != time.size())
      fail(Errc::SchemaError, std::string("meteo: '") + key + "' length differs from 'time'");

  RawTable raw;
  raw.names = kMeteoColumns;
  raw.columns.resize(2);
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (!time[i].is_number_integer())
      fail(Errc::SchemaError, "meteo: non-integer time (request timeformat=unixtime)");
    const auto t = time[i].get<EpochSeconds>();
    if (t < start || t >= end) continue;
    for (std::size_t c = 0; c < kFields.size(); ++c) {
      const auto& v = hourly[kFields[c].first][i];
      if (!v.is_number())
        fail(Errc::SchemaError, "meteo: missing " + std::string(kFields[c].first) + " at " +
                                    format_iso8601(t));
      raw.columns[c].push_back(v.get<double>());
    }
    raw.timestamps.push_back(t);
  }
  if (raw.timestamps.empty())
    fail(Errc::RangeEmpty, "meteo: no rows in [" + format_iso8601(start) + ", " + format_iso8601(end) + ")");
  HourlyFrame frame;
  try {
    frame = raw.timestamps.size() == 1 ? HourlyFrame(raw.timestamps, raw.names, raw.columns)
                                       : enforce_hourly_grid(std::move(raw));
  } catch (const Error& e) {
    fail(Errc::SchemaError, std::string("meteo: provider grid is not hourly (") + e.what() + ")");
  }
  require_full_coverage(frame, start, end, "meteo");
  return frame;
}

HourlyFrame fetch_air_pollution(const SourceConfig& cfg) {
  cfg.validate();
  std::string key = cfg.api_key.empty() ? env_or_empty(kOwmKeyEnv) : cfg.api_key;
  if (key.empty())
    fail(Errc::MissingApiKey, std::string("air-pollution: no API key; set the ") + kOwmKeyEnv +
                                  " environment variable");
  char query[256];
  std::snprintf(query, sizeof query, "/data/2.5/air_pollution/history?lat=%.6f&lon=%.6f&start=%lld&end=%lld",
                cfg.latitude, cfg.longitude, static_cast<long long>(cfg.start),
                static_cast<long long>(cfg.end));
  const std::string body =
      cached_get("openweather-air-pollution", cfg, cfg.owm_base_url, std::string(query) + "&appid=" + key);
  return parse_air_pollution_payload(body, cfg.start, cfg.end);
}

HourlyFrame fetch_meteo(const SourceConfig& cfg) {
  cfg.validate();
  char query[320];
  std::snprintf(query, sizeof query,
                "/v1/archive?latitude=%.6f&longitude=%.6f&start_date=%s&end_date=%s"
                "&hourly=temperature_2m,dew_point_2m&timezone=GMT&timeformat=unixtime",
                cfg.latitude, cfg.longitude, date_only(cfg.start).c_str(),
                date_only(cfg.end - kSecondsPerHour).c_str());
  const std::string body = cached_get("open-meteo-archive", cfg, cfg.meteo_base_url, query);
  return parse_meteo_payload(body, cfg.start, cfg.end);
}

HourlyFrame fetch_all(const SourceConfig& cfg) {
  auto pollution = std::async(std::launch::async, [&] { return fetch_air_pollution(cfg); });
  auto meteo = std::async(std::launch::async, [&] { return fetch_meteo(cfg); });
  const std::array<HourlyFrame, 2> frames{pollution.get(), meteo.get()};
  return merge_align(frames);
}

}  // namespace aethercast

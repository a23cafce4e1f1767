#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aethercast/series.hpp"

namespace aethercast {

/// Canonical column order of the hourly CSV schema.
inline const std::vector<std::string> kCanonicalColumns = {
    "pm2_5", "pm10", "co", "no", "no2", "so2", "o3", "nh3", "temperature", "dew_point"};

inline const std::vector<std::string> kPollutantColumns = {"pm2_5", "pm10", "co", "no",
                                                           "no2",   "so2",  "o3", "nh3"};
inline const std::vector<std::string> kMeteoColumns = {"temperature", "dew_point"};

inline constexpr const char* kOwmKeyEnv = "AETHERCAST_OWM_KEY";
inline constexpr const char* kOwmDefaultBase = "http://api.openweathermap.org";
inline constexpr const char* kMeteoDefaultBase = "https://archive-api.open-meteo.com";

struct SourceConfig {
  double latitude = 0.0;
  double longitude = 0.0;
  EpochSeconds start = 0;  // inclusive
  EpochSeconds end = 0;    // exclusive
  std::string api_key;
  std::filesystem::path cache_dir = ".aethercast-cache";
  // Scheme + host (+ port). Overridable so a local server can stand in.
  std::string owm_base_url = kOwmDefaultBase;
  std::string meteo_base_url = kMeteoDefaultBase;

  /// Throws InvalidArgument on an empty/inverted range or out-of-range
  /// coordinates.
  void validate() const;
};

/// Reads a CSV whose first column is `timestamp` (ISO-8601 UTC) and whose
/// remaining columns are numeric. Rows go through enforce_hourly_grid.
/// Throws ParseError (with 1-based line number), GridGap, DuplicateTimestamp.
HourlyFrame load_csv(const std::filesystem::path& path, std::string target_name = "pm2_5");

/// Writes `timestamp,<columns...>` with LF endings and shortest round-trip
/// number formatting. Write is atomic (temp file + rename).
void save_csv(const HourlyFrame& frame, const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`, creating
/// parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Inner join on timestamps; column order is concatenation order.
/// Throws ColumnCollision, EmptyIntersection.
HourlyFrame merge_align(std::span<const HourlyFrame> frames, std::string target_name = "pm2_5");

/// Raw-payload cache: one file per request key, named by the key's hex digest.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static std::string digest(std::string_view key);
  std::filesystem::path path_for(std::string_view key) const;
  std::optional<std::string> load(std::string_view key) const;
  void store(std::string_view key, std::string_view payload) const;

 private:
  std::filesystem::path dir_;
};

/// Pollutant columns (pm2_5 ... nh3) for each hour in [start, end).
/// The key comes from `cfg.api_key`, falling back to the environment.
/// Throws MissingApiKey, HttpError, SchemaError, RangeEmpty.
HourlyFrame fetch_air_pollution(const SourceConfig& cfg);

/// temperature and dew_point for each hour in [start, end).
HourlyFrame fetch_meteo(const SourceConfig& cfg);

/// Both providers fetched concurrently and merged.
HourlyFrame fetch_all(const SourceConfig& cfg);

// Payload parsers, exposed for testing against canned responses.
HourlyFrame parse_air_pollution_payload(std::string_view json, EpochSeconds start, EpochSeconds end);
HourlyFrame parse_meteo_payload(std::string_view json, EpochSeconds start, EpochSeconds end);

/// Shortest representation that parses back to the same double.
std::string format_number(double value);

}  // namespace aethercast

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aethercast/additive.hpp"
#include "aethercast/arnet.hpp"
#include "aethercast/preprocess.hpp"
#include "aethercast/regimes.hpp"
#include "aethercast/sarimax.hpp"
#include "aethercast/synthetic.hpp"

namespace aethercast {

/// Where the hourly frame comes from. Auto picks csv when a path is set,
/// otherwise fetch when coordinates are set.
enum class DataSource { Auto, Csv, Fetch, Synthetic };

enum class ModelKind { Sarimax, Additive, ArNet };
std::string_view model_name(ModelKind m) noexcept;
/// Accepts sarimax, additive, arnet. Throws InvalidValue.
ModelKind parse_model(std::string_view text);

struct ExperimentConfig {
  DataSource source = DataSource::Auto;
  std::filesystem::path csv;
  std::optional<double> latitude;
  std::optional<double> longitude;
  std::optional<EpochSeconds> start;
  std::optional<EpochSeconds> end;
  std::filesystem::path cache_dir = ".aethercast-cache";

  double split_ratio = 0.9;
  PreprocessOptions preprocess;
  std::vector<std::string> exog = {"no", "no2", "co", "so2"};
  bool include_pm10 = false;  // as a feature-selection candidate
  std::size_t select_k = 4;
  std::size_t mi_bins = 10;

  ModelKind model = ModelKind::Additive;
  Regime regime = Regime::WalkForward;
  double alpha = 0.3;
  BiasFilter bias_filter = BiasFilter::Ewma;
  double kalman_q = 1.0;
  double kalman_r = 8.0;
  std::uint64_t seed = 42;
  std::filesystem::path out = "runs";
  int threads = 0;  // bench cells in flight; 0 = one per cell

  SarimaxOrder sarimax_order;
  SarimaxFitOptions sarimax;
  bool sarimax_warm_start = true;
  AdditiveConfig additive;
  ArNetConfig arnet;
  SyntheticSpec synthetic;

  /// Throws InvalidValue.
  void validate() const;
  RegimeOptions regime_options() const;
  /// AR-net settings with the experiment seed applied.
  ArNetConfig arnet_config() const;
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Sets one key from its textual value. Throws UnknownKey, InvalidValue.
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// `key = value` lines; `#` starts a comment; blank lines ignored. Overrides
/// are applied after the text, then the result is validated.
ExperimentConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides = {});
/// Throws IoError when the file cannot be read.
ExperimentConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Every key with its current value, in the same textual form the parser
/// accepts.
nlohmann::json to_json(const ExperimentConfig& cfg);
/// All recognised keys, in documentation order.
std::vector<std::string> config_keys();

}  // namespace aethercast

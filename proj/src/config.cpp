#include "aethercast/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "aethercast/error.hpp"

namespace aethercast {

namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void invalid(std::string_view key, std::string_view value, std::string_view why) {
  fail(Errc::InvalidValue, "config: " + std::string(key) + " = '" + std::string(value) + "': " + std::string(why));
}

template <class T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || v.empty()) invalid(key, v, "not a number");
  return out;
}

double to_double(std::string_view k, std::string_view v) { return parse_number<double>(k, v); }
int to_int(std::string_view k, std::string_view v) { return parse_number<int>(k, v); }
std::size_t to_size(std::string_view k, std::string_view v) { return parse_number<std::size_t>(k, v); }

bool to_bool(std::string_view k, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  invalid(k, v, "expected true or false");
}

std::vector<std::string> to_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const auto comma = v.find(',', pos);
    const auto item = trim(v.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<int> to_ints(std::string_view k, std::string_view v, std::size_t count) {
  const auto items = to_list(v);
  if (items.size() != count) invalid(k, v, "expected " + std::to_string(count) + " comma-separated integers");
  std::vector<int> out;
  for (const auto& s : items) out.push_back(to_int(k, s));
  return out;
}

EpochSeconds to_time(std::string_view k, std::string_view v) {
  std::string text(v);
  if (text.size() == 10) text += "T00:00:00Z";
  try {
    return parse_iso8601(text);
  } catch (const Error&) {
    invalid(k, v, "expected YYYY-MM-DD or YYYY-MM-DDTHH:00:00Z");
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string_view source_name(DataSource s) {
  switch (s) {
    case DataSource::Auto: return "auto";
    case DataSource::Csv: return "csv";
    case DataSource::Fetch: return "fetch";
    case DataSource::Synthetic: return "synthetic";
  }
  return "auto";
}

struct Entry {
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<json(const ExperimentConfig&)> get;
};

#define AC_NUM(name, field, conv) \
  Entry { name, [](ExperimentConfig& c, auto k, auto v) { c.field = conv(k, v); }, [](const ExperimentConfig& c) { return json(c.field); } }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"source",
       [](ExperimentConfig& c, auto k, auto v) {
         if (v == "auto") c.source = DataSource::Auto;
         else if (v == "csv") c.source = DataSource::Csv;
         else if (v == "fetch") c.source = DataSource::Fetch;
         else if (v == "synthetic") c.source = DataSource::Synthetic;
         else invalid(k, v, "expected auto, csv, fetch or synthetic");
       },
       [](const ExperimentConfig& c) { return json(source_name(c.source)); }},
      {"csv", [](ExperimentConfig& c, auto, auto v) { c.csv = std::string(v); },
       [](const ExperimentConfig& c) { return json(c.csv.string()); }},
      {"lat", [](ExperimentConfig& c, auto k, auto v) { c.latitude = to_double(k, v); },
       [](const ExperimentConfig& c) { return c.latitude ? json(*c.latitude) : json(nullptr); }},
      {"lon", [](ExperimentConfig& c, auto k, auto v) { c.longitude = to_double(k, v); },
       [](const ExperimentConfig& c) { return c.longitude ? json(*c.longitude) : json(nullptr); }},
      {"start", [](ExperimentConfig& c, auto k, auto v) { c.start = to_time(k, v); },
       [](const ExperimentConfig& c) { return c.start ? json(format_iso8601(*c.start)) : json(nullptr); }},
      {"end", [](ExperimentConfig& c, auto k, auto v) { c.end = to_time(k, v); },
       [](const ExperimentConfig& c) { return c.end ? json(format_iso8601(*c.end)) : json(nullptr); }},
      {"cache_dir", [](ExperimentConfig& c, auto, auto v) { c.cache_dir = std::string(v); },
       [](const ExperimentConfig& c) { return json(c.cache_dir.string()); }},
      AC_NUM("split_ratio", split_ratio, to_double),
      AC_NUM("winsor_lo", preprocess.p_lo, to_double),
      AC_NUM("winsor_hi", preprocess.p_hi, to_double),
      AC_NUM("winsorize_target", preprocess.winsorize_target, to_bool),
      {"exog", [](ExperimentConfig& c, auto, auto v) { c.exog = to_list(v); },
       [](const ExperimentConfig& c) { return json(join(c.exog)); }},
      AC_NUM("include_pm10", include_pm10, to_bool),
      AC_NUM("select_k", select_k, to_size),
      AC_NUM("mi_bins", mi_bins, to_size),
      {"model", [](ExperimentConfig& c, auto, auto v) { c.model = parse_model(v); },
       [](const ExperimentConfig& c) { return json(model_name(c.model)); }},
      {"regime", [](ExperimentConfig& c, auto, auto v) { c.regime = parse_regime(v); },
       [](const ExperimentConfig& c) { return json(regime_name(c.regime)); }},
      AC_NUM("alpha", alpha, to_double),
      {"bias_filter",
       [](ExperimentConfig& c, auto k, auto v) {
         if (v == "ewma") c.bias_filter = BiasFilter::Ewma;
         else if (v == "kalman") c.bias_filter = BiasFilter::Kalman;
         else invalid(k, v, "expected ewma or kalman");
       },
       [](const ExperimentConfig& c) { return json(c.bias_filter == BiasFilter::Ewma ? "ewma" : "kalman"); }},
      AC_NUM("kalman_q", kalman_q, to_double),
      AC_NUM("kalman_r", kalman_r, to_double),
      AC_NUM("seed", seed, parse_number<std::uint64_t>),
      {"out", [](ExperimentConfig& c, auto, auto v) { c.out = std::string(v); },
       [](const ExperimentConfig& c) { return json(c.out.string()); }},
      AC_NUM("threads", threads, to_int),
      {"sarimax_order",
       [](ExperimentConfig& c, auto k, auto v) {
         const auto o = to_ints(k, v, 3);
         c.sarimax_order.p = o[0];
         c.sarimax_order.d = o[1];
         c.sarimax_order.q = o[2];
       },
       [](const ExperimentConfig& c) {
         const auto& o = c.sarimax_order;
         return json(std::to_string(o.p) + "," + std::to_string(o.d) + "," + std::to_string(o.q));
       }},
      {"sarimax_seasonal",
       [](ExperimentConfig& c, auto k, auto v) {
         const auto o = to_ints(k, v, 4);
         c.sarimax_order.P = o[0];
         c.sarimax_order.D = o[1];
         c.sarimax_order.Q = o[2];
         c.sarimax_order.s = o[3];
       },
       [](const ExperimentConfig& c) {
         const auto& o = c.sarimax_order;
         return json(std::to_string(o.P) + "," + std::to_string(o.D) + "," + std::to_string(o.Q) + "," +
                     std::to_string(o.s));
       }},
      AC_NUM("sarimax_intercept", sarimax.intercept, to_bool),
      AC_NUM("sarimax_max_iter", sarimax.max_iterations, to_int),
      AC_NUM("sarimax_tol", sarimax.relative_tolerance, to_double),
      AC_NUM("sarimax_warm_start", sarimax_warm_start, to_bool),
      AC_NUM("additive_changepoints", additive.n_changepoints, to_int),
      AC_NUM("additive_changepoint_range", additive.changepoint_range, to_double),
      AC_NUM("additive_daily_order", additive.daily_order, to_int),
      AC_NUM("additive_weekly_order", additive.weekly_order, to_int),
      AC_NUM("additive_yearly_order", additive.yearly_order, to_int),
      AC_NUM("additive_trend_penalty", additive.trend_penalty, to_double),
      AC_NUM("additive_seasonal_penalty", additive.seasonal_penalty, to_double),
      AC_NUM("additive_regressor_penalty", additive.regressor_penalty, to_double),
      AC_NUM("arnet_lags", arnet.n_lags, to_int),
      AC_NUM("arnet_forecasts", arnet.n_forecasts, to_int),
      AC_NUM("arnet_epochs", arnet.epochs, to_int),
      AC_NUM("arnet_batch", arnet.batch_size, to_int),
      AC_NUM("arnet_lr", arnet.learning_rate, to_double),
      {"arnet_optimizer",
       [](ExperimentConfig& c, auto k, auto v) {
         if (v == "sgd") c.arnet.optimizer = ArNetOptimizer::Sgd;
         else if (v == "adam") c.arnet.optimizer = ArNetOptimizer::Adam;
         else invalid(k, v, "expected sgd or adam");
       },
       [](const ExperimentConfig& c) { return json(c.arnet.optimizer == ArNetOptimizer::Sgd ? "sgd" : "adam"); }},
      AC_NUM("arnet_daily_order", arnet.daily_order, to_int),
      AC_NUM("arnet_weekly_order", arnet.weekly_order, to_int),
      AC_NUM("arnet_yearly_order", arnet.yearly_order, to_int),
      AC_NUM("synthetic_train_hours", synthetic.train_hours, to_size),
      AC_NUM("synthetic_test_weeks", synthetic.test_weeks, to_size),
      AC_NUM("synthetic_level_shift", synthetic.level_shift, to_double),
      AC_NUM("synthetic_noise_sd", synthetic.noise_sd, to_double),
      AC_NUM("synthetic_regressor_effect", synthetic.regressor_effect, to_double),
      AC_NUM("synthetic_seed", synthetic.seed, parse_number<std::uint64_t>),
  };
  return table;
}

#undef AC_NUM

void rethrow_as_invalid(const std::function<void()>& check) {
  try {
    check();
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidValue) throw;
    fail(Errc::InvalidValue, std::string("config: ") + e.what());
  }
}

}  // namespace

std::string_view model_name(ModelKind m) noexcept {
  switch (m) {
    case ModelKind::Sarimax: return "sarimax";
    case ModelKind::Additive: return "additive";
    case ModelKind::ArNet: return "arnet";
  }
  return "additive";
}

ModelKind parse_model(std::string_view text) {
  if (text == "sarimax") return ModelKind::Sarimax;
  if (text == "additive") return ModelKind::Additive;
  if (text == "arnet") return ModelKind::ArNet;
  fail(Errc::InvalidValue, "config: model '" + std::string(text) + "' (expected sarimax, additive or arnet)");
}

void ExperimentConfig::validate() const {
  auto need = [](bool ok, std::string_view key, const std::string& why) {
    if (!ok) fail(Errc::InvalidValue, "config: " + std::string(key) + ": " + why);
  };
  need(split_ratio > 0.0 && split_ratio < 1.0, "split_ratio", "must lie in (0,1)");
  need(preprocess.p_lo >= 0.0 && preprocess.p_lo < preprocess.p_hi && preprocess.p_hi <= 1.0, "winsor_lo/winsor_hi",
       "need 0 <= winsor_lo < winsor_hi <= 1");
  need(alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0,1)");
  need(kalman_q > 0.0 && kalman_r > 0.0, "kalman_q/kalman_r", "must be positive");
  need(select_k >= 1, "select_k", "must be at least 1");
  need(mi_bins >= 2, "mi_bins", "must be at least 2");
  need(threads >= 0, "threads", "must be non-negative");
  need(std::find(exog.begin(), exog.end(), "pm2_5") == exog.end(), "exog", "must not contain the target pm2_5");
  for (std::size_t i = 0; i < exog.size(); ++i)
    need(std::find(exog.begin() + static_cast<std::ptrdiff_t>(i) + 1, exog.end(), exog[i]) == exog.end(), "exog",
         "duplicate column '" + exog[i] + "'");
  if (latitude) need(*latitude >= -90.0 && *latitude <= 90.0, "lat", "must lie in [-90, 90]");
  if (longitude) need(*longitude >= -180.0 && *longitude <= 180.0, "lon", "must lie in [-180, 180]");
  if (start && end) need(*start < *end, "start/end", "start must precede end");
  if (source == DataSource::Csv) need(!csv.empty(), "csv", "source = csv needs a path");
  need(sarimax.max_iterations > 0, "sarimax_max_iter", "must be positive");
  need(sarimax.relative_tolerance > 0.0, "sarimax_tol", "must be positive");
  need(synthetic.train_hours >= 1 && synthetic.test_weeks >= 1, "synthetic_train_hours/synthetic_test_weeks",
       "must be positive");
  need(synthetic.noise_sd >= 0.0, "synthetic_noise_sd", "must be non-negative");
  rethrow_as_invalid([&] { sarimax_order.validate(); });
  rethrow_as_invalid([&] { additive.validate(); });
  rethrow_as_invalid([&] { arnet.validate(); });
}

RegimeOptions ExperimentConfig::regime_options() const {
  RegimeOptions o;
  o.regressors = exog;
  o.preprocess = preprocess;
  o.alpha = alpha;
  o.bias_filter = bias_filter;
  o.kalman_q = kalman_q;
  o.kalman_r = kalman_r;
  return o;
}

ArNetConfig ExperimentConfig::arnet_config() const {
  ArNetConfig c = arnet;
  c.seed = seed;
  return c;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& e : entries()) {
    if (key == e.key) {
      e.set(cfg, key, trim(value));
      return;
    }
  }
  fail(Errc::UnknownKey, "config: unknown key '" + std::string(key) + "'");
}

ExperimentConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides) {
  ExperimentConfig cfg;
  std::map<std::string, std::size_t, std::less<>> key_line;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(Errc::InvalidValue, "config: line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const Error& e) {
      const std::string what = e.what();
      const auto detail = what.substr(what.find(": ") + 2);
      fail(e.code(), "line " + std::to_string(line_no) + ": " + detail);
    }
    key_line[std::string(key)] = line_no;
  }
  for (const auto& [key, value] : overrides) {
    set_config_value(cfg, key, value);
    key_line.erase(key);
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    // Blame the file line that set the offending key, when there is one.
    const std::string what = e.what();
    const auto tag = what.find("config: ");
    if (tag == std::string::npos) throw;
    const auto detail = what.substr(tag + 8);
    const auto colon = detail.find(": ");
    std::size_t blamed = 0;
    std::string_view keys(detail.data(), colon == std::string::npos ? 0 : colon);
    while (!keys.empty()) {
      const auto slash = keys.find('/');
      if (const auto it = key_line.find(keys.substr(0, slash)); it != key_line.end()) blamed = std::max(blamed, it->second);
      keys = slash == std::string_view::npos ? std::string_view{} : keys.substr(slash + 1);
    }
    if (blamed == 0) throw;
    fail(e.code(), "line " + std::to_string(blamed) + ": " + detail);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "config: cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json j = json::object();
  for (const auto& e : entries()) j[e.key] = e.get(cfg);
  return j;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

}  // namespace aethercast

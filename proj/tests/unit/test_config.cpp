#include <doctest.h>

#include "aethercast/config.hpp"
#include "aethercast/error.hpp"

using namespace aethercast;

namespace {

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

TEST_CASE("empty file gives the documented defaults") {
  const auto cfg = parse_config_text("");
  CHECK(cfg.split_ratio == 0.9);
  CHECK(cfg.preprocess.p_lo == 0.01);
  CHECK(cfg.preprocess.p_hi == 0.99);
  CHECK(cfg.exog == std::vector<std::string>{"no", "no2", "co", "so2"});
  CHECK(cfg.alpha == 0.3);
  CHECK(cfg.sarimax_order.p == 1);
  CHECK(cfg.sarimax_order.d == 1);
  CHECK(cfg.sarimax_order.q == 1);
  CHECK(cfg.sarimax_order.s == 24);
  CHECK(cfg.arnet.n_lags == 168);
  CHECK(cfg.arnet.n_forecasts == 168);
  CHECK_FALSE(cfg.include_pm10);
  CHECK(cfg.bias_filter == BiasFilter::Ewma);
}

TEST_CASE("values, comments and whitespace") {
  const auto cfg = parse_config_text(
      "# experiment\n"
      "model = sarimax\n"
      "regime=frozen-corrected   # inline comment\n"
      "\n"
      "  alpha =  0.5\n"
      "exog = no2, co\n"
      "sarimax_seasonal = 0,1,1,24\n"
      "start = 2023-01-01\n"
      "end = 2023-02-01T00:00:00Z\n"
      "winsorize_target = false\n"
      "arnet_optimizer = adam\n");
  CHECK(cfg.model == ModelKind::Sarimax);
  CHECK(cfg.regime == Regime::FrozenCorrected);
  CHECK(cfg.alpha == 0.5);
  CHECK(cfg.exog == std::vector<std::string>{"no2", "co"});
  CHECK(cfg.sarimax_order.P == 0);
  CHECK(cfg.sarimax_order.Q == 1);
  CHECK(*cfg.start == 1'672'531'200);
  CHECK(*cfg.end - *cfg.start == 31 * 86'400);
  CHECK_FALSE(cfg.preprocess.winsorize_target);
  CHECK(cfg.arnet.optimizer == ArNetOptimizer::Adam);
}

TEST_CASE("invalid values and unknown keys") {
  CHECK(code_of([] { parse_config_text("alpha = 1.5\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("alpha = 0\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("alpha = abc\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("colour = blue\n"); }) == Errc::UnknownKey);
  CHECK(code_of([] { parse_config_text("model = prophet\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("regime = daily\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("split_ratio = 1\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("winsor_lo = 0.5\nwinsor_hi = 0.4\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("exog = no2, pm2_5\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("sarimax_order = 1,1\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("sarimax_order = -1,1,1\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("arnet_lags = 0\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("lat = 95\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("start = 2023-02-01\nend = 2023-01-01\n"); }) == Errc::InvalidValue);
  CHECK(code_of([] { parse_config_text("just some words\n"); }) == Errc::InvalidValue);
  try {
    parse_config_text("\n\nalpha = 7\n");
    FAIL("expected InvalidValue");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(code_of([] { parse_config("/nonexistent/aethercast.conf"); }) == Errc::IoError);
}

TEST_CASE("flag overrides take precedence over the file") {
  const auto cfg = parse_config_text("regime = walkforward\nalpha = 0.2\n", {{"regime", "frozen"}});
  CHECK(cfg.regime == Regime::Frozen);
  CHECK(cfg.alpha == 0.2);
  CHECK(code_of([] { parse_config_text("", {{"nope", "1"}}); }) == Errc::UnknownKey);
}

TEST_CASE("manifest form lists every key and round-trips") {
  auto cfg = parse_config_text("model = arnet\nlat = 39.9\nexog = no,co\nseed = 7\n");
  const auto j = to_json(cfg);
  const auto keys = config_keys();
  CHECK(j.size() == keys.size());
  for (const auto& k : keys) CHECK(j.contains(k));

  ExperimentConfig rebuilt;
  for (const auto& [key, value] : j.items()) {
    if (value.is_null()) continue;
    const std::string text = value.is_string() ? value.get<std::string>() : value.dump();
    set_config_value(rebuilt, key, text);
  }
  CHECK(to_json(rebuilt) == j);
  CHECK(cfg.arnet_config().seed == 7);
  CHECK(cfg.regime_options().regressors == std::vector<std::string>{"no", "co"});
}

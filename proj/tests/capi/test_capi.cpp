#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>

#include "aethercast/aethercast.h"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("ac_capi_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

struct Config {
  ac_config* ptr = nullptr;
  Config() { REQUIRE(ac_config_new(&ptr) == AC_OK); }
  ~Config() { ac_config_free(ptr); }
  void set(const char* k, const char* v) { REQUIRE_MESSAGE(ac_config_set(ptr, k, v) == AC_OK, ac_last_error()); }
};

/// Small synthetic experiment with quick model settings.
void small_experiment(Config& c) {
  c.set("source", "synthetic");
  c.set("synthetic_train_hours", "1440");
  c.set("synthetic_test_weeks", "2");
  c.set("sarimax_order", "1,0,0");
  c.set("sarimax_seasonal", "0,0,0,24");
  c.set("arnet_lags", "24");
  c.set("arnet_forecasts", "24");
  c.set("arnet_epochs", "2");
}

}  // namespace

TEST_CASE("status names and null handling") {
  CHECK(std::string(ac_status_name(AC_OK)) == "ok");
  CHECK(std::string(ac_status_name(AC_ERR_MODEL)) == "model");
  CHECK(ac_config_new(nullptr) == AC_ERR_INVALID_ARGUMENT);
  CHECK(ac_frame_load_csv(nullptr, nullptr) == AC_ERR_INVALID_ARGUMENT);
  ac_summary s;
  CHECK(ac_report_summary(nullptr, &s) == AC_ERR_INVALID_ARGUMENT);
  ac_config_free(nullptr);
  ac_frame_free(nullptr);
  ac_report_free(nullptr);
  ac_string_free(nullptr);
}

TEST_CASE("last error is per thread") {
  Config c;
  CHECK(ac_config_set(c.ptr, "bogus", "1") == AC_ERR_CONFIG);
  const std::string mine = ac_last_error();
  CHECK(mine.find("bogus") != std::string::npos);
  std::string other;
  std::thread([&] {
    ac_config* cfg = nullptr;
    ac_config_new(&cfg);
    ac_config_set(cfg, "alpha", "zzz");
    other = ac_last_error();
    ac_config_free(cfg);
  }).join();
  CHECK(other.find("alpha") != std::string::npos);
  CHECK(std::string(ac_last_error()) == mine);
}

TEST_CASE("config keys and JSON") {
  char* keys = nullptr;
  REQUIRE(ac_config_keys(&keys) == AC_OK);
  CHECK(std::string(keys).find("\"alpha\"") != std::string::npos);
  ac_string_free(keys);
  Config c;
  c.set("seed", "9");
  char* json = nullptr;
  REQUIRE(ac_config_to_json(c.ptr, &json) == AC_OK);
  CHECK(std::string(json).find("\"seed\": 9") != std::string::npos);
  ac_string_free(json);
}

TEST_CASE("frames through the C API") {
  const auto dir = scratch("frame");
  Config c;
  small_experiment(c);
  const auto file = (dir / "syn.csv").string();
  REQUIRE(ac_synth(c.ptr, file.c_str()) == AC_OK);
  ac_frame* f = nullptr;
  REQUIRE(ac_frame_load_csv(file.c_str(), &f) == AC_OK);
  size_t rows = 0, cols = 0;
  ac_frame_shape(f, &rows, &cols);
  CHECK(rows == 1440 + 2 * 168);
  const auto copy = (dir / "copy.csv").string();
  REQUIRE(ac_frame_save_csv(f, copy.c_str()) == AC_OK);
  CHECK(slurp(copy) == slurp(file));
  ac_frame_free(f);
  CHECK(ac_frame_load_csv((dir / "none.csv").string().c_str(), &f) == AC_ERR_IO);
  fs::remove_all(dir);
}

TEST_CASE("run, window scores and re-emission") {
  const auto dir = scratch("run");
  Config c;
  small_experiment(c);
  c.set("regime", "frozen-corrected");
  ac_report* r = nullptr;
  REQUIRE_MESSAGE(ac_run(c.ptr, dir.string().c_str(), &r) == AC_OK, ac_last_error());
  size_t n = 0;
  ac_report_window_count(r, &n);
  REQUIRE(n == 2);
  ac_window_score w{};
  REQUIRE(ac_report_window(r, 0, &w) == AC_OK);
  CHECK(w.week == 1);
  CHECK(w.bias == 0.0);
  CHECK(w.mae == w.base_mae);
  REQUIRE(ac_report_window(r, 1, &w) == AC_OK);
  CHECK(w.bias != 0.0);
  CHECK(ac_report_window(r, 5, &w) == AC_ERR_INVALID_ARGUMENT);
  ac_summary s{};
  REQUIRE(ac_report_summary(r, &s) == AC_OK);
  ac_report_free(r);

  const auto scores = slurp(dir / "scores.csv");
  const auto forecasts = slurp(dir / "forecasts.csv");
  REQUIRE(ac_report_reemit(dir.string().c_str(), &r) == AC_OK);
  ac_summary again{};
  REQUIRE(ac_report_summary(r, &again) == AC_OK);
  CHECK(again.mae == doctest::Approx(s.mae).epsilon(1e-12));
  CHECK(again.best_week == s.best_week);
  ac_report_free(r);
  CHECK(slurp(dir / "scores.csv") == scores);
  CHECK(slurp(dir / "forecasts.csv") == forecasts);
  fs::remove_all(dir);
}

TEST_CASE("prepare and select-features stages") {
  const auto dir = scratch("stages");
  Config c;
  small_experiment(c);
  REQUIRE(ac_prepare(c.ptr, dir.string().c_str()) == AC_OK);
  for (const char* f : {"train.csv", "test.csv", "pipeline.json"}) CHECK(fs::exists(dir / f));
  ac_frame* train = nullptr;
  REQUIRE(ac_frame_load_csv((dir / "train.csv").string().c_str(), &train) == AC_OK);
  size_t rows = 0, cols = 0;
  ac_frame_shape(train, &rows, &cols);
  CHECK(rows == 1440);
  CHECK(cols == 5);
  ac_frame_free(train);

  char* ranking = nullptr;
  REQUIRE(ac_select_features(c.ptr, dir.string().c_str(), &ranking) == AC_OK);
  CHECK(std::string(ranking).find("\"rank\": 1") != std::string::npos);
  CHECK(std::string(ranking).find("pm10") == std::string::npos);
  ac_string_free(ranking);
  for (const char* f : {"relevance.csv", "relevance.svg", "selection.json"}) CHECK(fs::exists(dir / f));
  fs::remove_all(dir);
}

TEST_CASE("bench runs the six cells") {
  const auto dir = scratch("bench");
  Config c;
  small_experiment(c);
  const auto ref = dir / "reference.csv";
  fs::create_directories(dir);
  std::ofstream(ref) << "model,regime,mae,rmse\nadditive,walkforward,37.61,50.10\n";
  char* table = nullptr;
  REQUIRE_MESSAGE(ac_bench(c.ptr, dir.string().c_str(), ref.string().c_str(), &table) == AC_OK, ac_last_error());
  const std::string md = table;
  ac_string_free(table);
  CHECK(md.find("Ref MAE") != std::string::npos);
  CHECK(md.find("37.61") != std::string::npos);
  const auto csv = slurp(dir / "bench.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  for (const char* m : {"sarimax", "additive", "arnet"})
    for (const char* r : {"walkforward", "frozen-corrected"}) {
      const auto cell = dir / (std::string(m) + "-" + r);
      CHECK_MESSAGE(fs::exists(cell / "scores.csv"), cell.string());
    }
  fs::remove_all(dir);
}

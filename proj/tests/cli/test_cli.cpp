#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code = -1;
  std::string out, err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("ac_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result cli(const std::string& args, const std::string& env = "") {
  const auto out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && " + env + " '" AC_CLI_PATH "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const std::string kSmall =
    " --source synthetic --set synthetic_train_hours=1440 --set synthetic_test_weeks=2 ";

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(cli("--help").code == 0);
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("run --model").code == 1);
}

TEST_CASE("synthetic fixture through run, frozen-corrected additive") {
  const auto r = cli("run" + kSmall + "--model additive --regime frozen-corrected --out a");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"scores.csv", "forecasts.csv", "forecast_trace.csv", "manifest.json", "best_worst.svg"})
    CHECK(fs::exists(workdir() / "a" / f));
  CHECK(r.out.find("MAE") != std::string::npos);
  const auto forecasts = slurp(workdir() / "a" / "forecasts.csv");
  CHECK(std::count(forecasts.begin(), forecasts.end(), '\n') == 2 * 168 + 1);

  REQUIRE(cli("run" + kSmall + "--model additive --regime frozen-corrected --out b").code == 0);
  CHECK(slurp(workdir() / "a" / "scores.csv") == slurp(workdir() / "b" / "scores.csv"));
  CHECK(slurp(workdir() / "a" / "forecasts.csv") == slurp(workdir() / "b" / "forecasts.csv"));

  const auto scores = slurp(workdir() / "a" / "scores.csv");
  REQUIRE(cli("report a").code == 0);
  CHECK(slurp(workdir() / "a" / "scores.csv") == scores);
}

TEST_CASE("config file with flag precedence") {
  std::ofstream(workdir() / "exp.conf") << "# test\nregime = walkforward\nmodel = additive\nalpha = 0.4\n";
  const auto r = cli("run --config exp.conf --regime frozen" + kSmall + "--out c");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto manifest = slurp(workdir() / "c" / "manifest.json");
  CHECK(manifest.find("\"regime\": \"frozen\"") != std::string::npos);
  CHECK(manifest.find("\"alpha\": 0.4") != std::string::npos);  // file value kept where no flag overrides
  CHECK(manifest.find("\"split_ratio\"") != std::string::npos);
}

TEST_CASE("exit codes") {
  auto r = cli("run --alpha 1.5" + kSmall);
  CHECK(r.code == 1);
  CHECK(r.err.find("alpha") != std::string::npos);
  CHECK(cli("run --set colour=blue").code == 1);
  CHECK(cli("run --config missing.conf").code == 2);
  CHECK(cli("run").code == 1);  // no data source
  CHECK(cli("run --csv nothing.csv").code == 2);
  CHECK(cli("report nowhere").code == 2);

  r = cli("fetch --lat 39.9 --lon 116.4 --start 2023-01-01 --end 2023-01-02 --out f.csv --set cache_dir=empty-cache",
          "env -u AETHERCAST_OWM_KEY");
  CHECK(r.code == 1);
  CHECK(r.err.find("AETHERCAST_OWM_KEY") != std::string::npos);
  CHECK(cli("fetch --lat 39.9 --out f.csv").code == 1);
}

TEST_CASE("synth, prepare and select-features") {
  REQUIRE(cli("synth --set synthetic_train_hours=500 --set synthetic_test_weeks=1 --out s.csv").code == 0);
  const auto csv = slurp(workdir() / "s.csv");
  CHECK(csv.rfind("timestamp,pm2_5,pm10,co,no,no2,so2,o3,nh3,temperature,dew_point\n", 0) == 0);
  CHECK(cli("prepare --csv s.csv --out p").code == 0);
  CHECK(fs::exists(workdir() / "p" / "pipeline.json"));
  const auto r = cli("select-features --csv s.csv --out p");
  CHECK(r.code == 0);
  CHECK(r.out.find("rank") != std::string::npos);
  CHECK(fs::exists(workdir() / "p" / "relevance.svg"));
}

TEST_CASE("a run without any completed week is a runtime failure") {
  // A lag window longer than the training data fails the first fit.
  const auto r = cli("run" + kSmall + "--model arnet --set arnet_lags=2000 --out bad");
  CHECK(r.code == 2);
  CHECK(r.err.find("week 1") != std::string::npos);
}

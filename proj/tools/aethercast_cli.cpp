// Command-line front end. Talks to the library only through the C API.
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aethercast/aethercast.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::string> model, regime, alpha, seed, out, lat, lon, start, end, csv, source;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--model", f.model, "sarimax | additive | arnet");
  cmd->add_option("--regime", f.regime, "walkforward | frozen | frozen-corrected");
  cmd->add_option("--alpha", f.alpha, "bias smoothing factor in (0,1)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--out", f.out, "output directory (output file for fetch and synth)");
  cmd->add_option("--lat", f.lat, "latitude in degrees");
  cmd->add_option("--lon", f.lon, "longitude in degrees");
  cmd->add_option("--start", f.start, "first hour, YYYY-MM-DD or YYYY-MM-DDTHH:00:00Z (UTC)");
  cmd->add_option("--end", f.end, "end of range, exclusive (UTC)");
  cmd->add_option("--csv", f.csv, "hourly CSV input");
  cmd->add_option("--source", f.source, "auto | csv | fetch | synthetic");
  cmd->add_option("--set", f.sets, "extra key=value override; repeatable");
}

int exit_code_for(ac_status s) {
  if (s == AC_OK) return kExitOk;
  return (s == AC_ERR_CONFIG || s == AC_ERR_INVALID_ARGUMENT) ? kExitConfig : kExitRuntime;
}

int report_failure(const char* stage, ac_status s) {
  std::fprintf(stderr, "aethercast %s: %s\n", stage, ac_last_error());
  return exit_code_for(s);
}

struct ConfigHandle {
  ac_config* ptr = nullptr;
  ~ConfigHandle() { ac_config_free(ptr); }
};

struct ReportHandle {
  ac_report* ptr = nullptr;
  ~ReportHandle() { ac_report_free(ptr); }
};

std::string take_string(char* s) {
  std::string out = s ? s : "";
  ac_string_free(s);
  return out;
}

/// File first, then flags, then --set entries; validated last.
ac_status build_config(const CommonFlags& f, ConfigHandle& cfg) {
  if (auto s = ac_config_load(f.config.empty() ? nullptr : f.config.c_str(), &cfg.ptr); s != AC_OK) return s;
  const std::pair<const char*, const std::optional<std::string>*> flags[] = {
      {"model", &f.model}, {"regime", &f.regime}, {"alpha", &f.alpha}, {"seed", &f.seed},
      {"lat", &f.lat},     {"lon", &f.lon},       {"start", &f.start}, {"end", &f.end},
      {"csv", &f.csv},     {"source", &f.source}};
  for (const auto& [key, value] : flags)
    if (*value)
      if (auto s = ac_config_set(cfg.ptr, key, (*value)->c_str()); s != AC_OK) return s;
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "aethercast: --set expects key=value, got '%s'\n", kv.c_str());
      return AC_ERR_CONFIG;
    }
    if (auto s = ac_config_set(cfg.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()); s != AC_OK) return s;
  }
  return ac_config_validate(cfg.ptr);
}

std::string config_value(const ConfigHandle& cfg, const char* key) {
  char* text = nullptr;
  if (ac_config_to_json(cfg.ptr, &text) != AC_OK) return {};
  const auto j = nlohmann::json::parse(take_string(text));
  return j.value(key, "");
}

void print_summary(const ac_report* report, const std::string& dir) {
  ac_summary s{};
  if (ac_report_summary(report, &s) != AC_OK) return;
  std::printf("weeks      %zu\n", s.windows);
  std::printf("MAE        %.3f  (base %.3f)\n", s.mae, s.base_mae);
  std::printf("RMSE       %.3f  (base %.3f)\n", s.rmse, s.base_rmse);
  std::printf("best week  %zu\nworst week %zu\n", s.best_week, s.worst_week);
  std::printf("seconds    %.2f\n", s.seconds);
  if (s.partial) {
    char* text = nullptr;
    std::string error;
    if (ac_report_to_json(report, &text) == AC_OK)
      error = nlohmann::json::parse(take_string(text)).value("error", "");
    std::printf("partial    stopped at week %zu: %s\n", s.failed_week, error.c_str());
  }
  std::printf("written to %s\n", dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hourly PM2.5 forecasting benchmark"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ac_version());

  CommonFlags flags;
  std::string run_dir, reference;

  auto* fetch = app.add_subcommand("fetch", "download pollution and weather series into a CSV");
  auto* synth = app.add_subcommand("synth", "write a synthetic drift series as CSV");
  auto* prepare = app.add_subcommand("prepare", "fit preprocessing on the training split and write transformed CSVs");
  auto* select = app.add_subcommand("select-features", "rank candidate regressors on the training split");
  auto* run = app.add_subcommand("run", "fit, forecast and score one model under one regime");
  auto* report = app.add_subcommand("report", "rebuild the report files of a run directory");
  auto* bench = app.add_subcommand("bench", "all models under walk-forward and frozen-corrected");
  for (auto* cmd : {fetch, synth, prepare, select, run, bench}) add_common(cmd, flags);
  report->add_option("run_dir", run_dir, "directory written by run")->required();
  bench->add_option("--reference", reference, "CSV model,regime,mae,rmse to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (report->parsed()) {
    ReportHandle r;
    if (auto s = ac_report_reemit(run_dir.c_str(), &r.ptr); s != AC_OK) return report_failure("report", s);
    print_summary(r.ptr, run_dir);
    return kExitOk;
  }

  ConfigHandle cfg;
  if (auto s = build_config(flags, cfg); s != AC_OK) return report_failure("config", s);
  const std::string out = flags.out.value_or(config_value(cfg, "out"));

  if (fetch->parsed() || synth->parsed()) {
    const std::string file = flags.out ? *flags.out : "data.csv";
    const auto s = fetch->parsed() ? ac_fetch(cfg.ptr, file.c_str()) : ac_synth(cfg.ptr, file.c_str());
    if (s != AC_OK) return report_failure(fetch->parsed() ? "fetch" : "synth", s);
    std::printf("wrote %s\n", file.c_str());
    return kExitOk;
  }
  if (prepare->parsed()) {
    if (auto s = ac_prepare(cfg.ptr, out.c_str()); s != AC_OK) return report_failure("prepare", s);
    std::printf("wrote %s/train.csv, test.csv, pipeline.json\n", out.c_str());
    return kExitOk;
  }
  if (select->parsed()) {
    char* text = nullptr;
    if (auto s = ac_select_features(cfg.ptr, out.c_str(), &text); s != AC_OK) return report_failure("select-features", s);
    std::printf("%-12s %9s %9s %5s\n", "feature", "pearson", "mi", "rank");
    for (const auto& e : nlohmann::json::parse(take_string(text)))
      std::printf("%-12s %9.4f %9.4f %5zu\n", e["feature"].get<std::string>().c_str(), e["pearson"].get<double>(),
                  e["mi"].get<double>(), e["rank"].get<std::size_t>());
    return kExitOk;
  }
  if (run->parsed()) {
    ReportHandle r;
    if (auto s = ac_run(cfg.ptr, out.c_str(), &r.ptr); s != AC_OK) return report_failure("run", s);
    print_summary(r.ptr, out);
    return kExitOk;
  }
  if (bench->parsed()) {
    char* table = nullptr;
    if (auto s = ac_bench(cfg.ptr, out.c_str(), reference.empty() ? nullptr : reference.c_str(), &table); s != AC_OK)
      return report_failure("bench", s);
    std::printf("%s", take_string(table).c_str());
    return kExitOk;
  }
  return kExitConfig;
}

#include "aethercast/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "aethercast/error.hpp"
#include "aethercast/ingest.hpp"
#include "aethercast/synthetic.hpp"

namespace aethercast {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

void require_columns(const HourlyFrame& frame, const ExperimentConfig& cfg) {
  if (!frame.has_column(frame.target_name()))
    fail(Errc::MissingColumn, "experiment: data has no target column '" + frame.target_name() + "'");
  for (const auto& c : cfg.exog)
    if (!frame.has_column(c)) fail(Errc::MissingColumn, "experiment: data has no regressor column '" + c + "'");
}

SourceConfig source_config(const ExperimentConfig& cfg) {
  if (!cfg.latitude || !cfg.longitude || !cfg.start || !cfg.end)
    fail(Errc::InvalidValue, "config: fetching needs lat, lon, start and end");
  SourceConfig s;
  s.latitude = *cfg.latitude;
  s.longitude = *cfg.longitude;
  s.start = *cfg.start;
  s.end = *cfg.end;
  s.cache_dir = cfg.cache_dir;
  return s;
}

json data_summary(const HourlyFrame& frame, const ChronoSplit& split, std::size_t windows) {
  return {{"rows", frame.rows()},
          {"train_rows", split.train.rows()},
          {"test_rows", split.test.rows()},
          {"windows", windows},
          {"start", format_iso8601(frame.start())},
          {"end", format_iso8601(frame.end())},
          {"test_start", format_iso8601(split.test.start())}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

HourlyFrame load_frame(const ExperimentConfig& cfg) {
  DataSource source = cfg.source;
  if (source == DataSource::Auto) {
    if (!cfg.csv.empty()) source = DataSource::Csv;
    else if (cfg.latitude || cfg.longitude) source = DataSource::Fetch;
    else
      fail(Errc::InvalidValue, "config: no data source; set csv, the fetch coordinates (lat, lon, start, end) "
                               "or source = synthetic");
  }
  switch (source) {
    case DataSource::Csv: return load_csv(cfg.csv);
    case DataSource::Fetch: return fetch_all(source_config(cfg));
    case DataSource::Synthetic: return make_synthetic(cfg.synthetic);
    case DataSource::Auto: break;
  }
  fail(Errc::InvalidValue, "config: unresolved data source");
}

ChronoSplit split_frame(const ExperimentConfig& cfg, const HourlyFrame& frame) {
  const bool synthetic = cfg.source == DataSource::Synthetic;
  return chrono_split(frame, synthetic ? synthetic_ratio(cfg.synthetic) : cfg.split_ratio);
}

std::unique_ptr<Forecaster> make_forecaster(const ExperimentConfig& cfg) {
  switch (cfg.model) {
    case ModelKind::Sarimax: return make_sarimax_forecaster(cfg.sarimax_order, cfg.sarimax, cfg.sarimax_warm_start);
    case ModelKind::Additive: return make_additive_forecaster(cfg.additive);
    case ModelKind::ArNet: return make_arnet_forecaster(cfg.arnet_config());
  }
  fail(Errc::InvalidValue, "config: unknown model");
}

std::vector<std::string> selection_candidates(const ExperimentConfig& cfg, const HourlyFrame& frame) {
  std::vector<std::string> out;
  for (const auto& name : frame.column_names()) {
    if (name == frame.target_name()) continue;
    if (name == "pm10" && !cfg.include_pm10) continue;
    out.push_back(name);
  }
  return out;
}

RelevanceReport select_features(const ExperimentConfig& cfg, const HourlyFrame& frame) {
  const auto split = split_frame(cfg, frame);
  const auto candidates = selection_candidates(cfg, frame);
  if (candidates.empty()) fail(Errc::MissingColumn, "featsel: no candidate regressors in the data");
  return relevance_report(split.train, frame.target_name(), candidates, cfg.mi_bins);
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const HourlyFrame& frame, const fs::path& out_dir) {
  cfg.validate();
  require_columns(frame, cfg);
  const auto split = split_frame(cfg, frame);
  const auto windows = weekly_windows(split.test);
  if (windows.empty())
    fail(Errc::EmptyRun, "experiment: test segment has " + std::to_string(split.test.rows()) +
                             " hours, fewer than one week");

  auto model = make_forecaster(cfg);
  const auto run = run_regime(cfg.regime, *model, split, windows, cfg.regime_options());
  if (run.records.empty()) fail(Errc::EmptyRun, "experiment: no week completed; " + run.error);

  RunOutcome out;
  out.report = build_report(run, std::string(model_name(cfg.model)), std::string(regime_name(cfg.regime)),
                            cfg.regime == Regime::FrozenCorrected ? cfg.alpha : 0.0);
  out.records = run.records;
  out.dir = out_dir;

  json extra = {{"config", to_json(cfg)},
                {"data", data_summary(frame, split, windows.size())},
                {"pipeline", to_json(run.pipeline)},
                {"model_params", run.model_params},
                {"seed", cfg.seed}};
  if (cfg.regime == Regime::FrozenCorrected)
    extra["bias_filter"] = cfg.bias_filter == BiasFilter::Ewma ? "ewma" : "kalman";
  const auto candidates = selection_candidates(cfg, frame);
  if (!candidates.empty()) {
    const auto rel = relevance_report(split.train, frame.target_name(), candidates, cfg.mi_bins);
    const auto k = std::min(cfg.select_k, rel.ranking.size());
    extra["selection"] = {{"mrmr_ranking", rel.ranking},
                          {"mrmr_top_k", std::vector<std::string>(rel.ranking.begin(), rel.ranking.begin() + static_cast<std::ptrdiff_t>(k))},
                          {"used", cfg.exog}};
  }
  emit_report(out.report, out.records, out_dir, extra);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
  return run_experiment(cfg, load_frame(cfg), out_dir);
}

void prepare_dataset(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const auto frame = load_frame(cfg);
  require_columns(frame, cfg);
  const auto split = split_frame(cfg, frame);
  const auto state = fit_pipeline(split.train, cfg.exog, cfg.preprocess);
  save_csv(transform(state, split.train), out_dir / "train.csv");
  save_csv(transform(state, split.test), out_dir / "test.csv");
  json doc = to_json(state);
  doc["data"] = data_summary(frame, split, weekly_windows(split.test).size());
  doc["config"] = to_json(cfg);
  write_text_file(out_dir / "pipeline.json", doc.dump(2) + "\n");
}

RelevanceReport write_selection(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const auto frame = load_frame(cfg);
  const auto rel = select_features(cfg, frame);
  write_text_file(out_dir / "relevance.csv", relevance_csv(rel));
  write_text_file(out_dir / "relevance.svg", relevance_svg(rel));
  const auto k = std::min(cfg.select_k, rel.ranking.size());
  const json doc = {
      {"candidates", selection_candidates(cfg, frame)},
      {"ranking", rel.ranking},
      {"top_k", std::vector<std::string>(rel.ranking.begin(), rel.ranking.begin() + static_cast<std::ptrdiff_t>(k))},
      {"pinned_exog", cfg.exog},
      {"bins", cfg.mi_bins},
      {"train_rows", split_frame(cfg, frame).train.rows()}};
  write_text_file(out_dir / "selection.json", doc.dump(2) + "\n");
  return rel;
}

RunReport reemit_report(const fs::path& run_dir) {
  std::ifstream in(run_dir / "manifest.json");
  if (!in) fail(Errc::IoError, "report: no manifest.json in '" + run_dir.string() + "'");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, std::string("report: manifest.json: ") + e.what());
  }
  RegimeRun run;
  run.records = load_records(run_dir);
  if (run.records.empty()) fail(Errc::EmptyRun, "report: '" + run_dir.string() + "' holds no weeks");
  run.partial = manifest.value("partial", false);
  if (manifest.contains("failed_week") && manifest["failed_week"].is_number())
    run.failed_week = manifest["failed_week"].get<std::size_t>();
  run.error = manifest.value("error", "");
  run.seconds = manifest.value("seconds", 0.0);
  run.fits = manifest.value("fits", std::size_t{0});
  auto report = build_report(run, manifest.value("model", ""), manifest.value("regime", ""),
                             manifest.value("alpha", 0.0));
  json extra = manifest;
  for (const char* key : {"aggregate", "base_aggregate", "weeks", "base_scores"}) extra.erase(key);
  emit_report(report, run.records, run_dir, extra);
  return report;
}

std::vector<ReferenceRow> load_reference(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "bench: cannot read reference '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("model,regime,mae,rmse", 0) != 0)
    fail(Errc::ParseError, "bench: " + path.string() + ":1: expected header model,regime,mae,rmse");
  std::vector<ReferenceRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& s : f) std::getline(ss, s, ',');
    try {
      rows.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3])});
    } catch (const std::logic_error&) {
      fail(Errc::ParseError, "bench: " + path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

std::vector<BenchCell> run_bench(const ExperimentConfig& cfg, const fs::path& out_dir,
                                 const std::vector<ReferenceRow>& reference) {
  cfg.validate();
  const auto frame = load_frame(cfg);
  std::vector<BenchCell> cells;
  for (auto m : {ModelKind::Sarimax, ModelKind::Additive, ModelKind::ArNet})
    for (auto r : {Regime::WalkForward, Regime::FrozenCorrected}) cells.push_back({m, r, std::nullopt, {}, {}, {}});
  for (auto& c : cells)
    for (const auto& ref : reference)
      if (ref.model == model_name(c.model) && ref.regime == regime_name(c.regime)) {
        c.reference_mae = ref.mae;
        c.reference_rmse = ref.rmse;
      }

  auto run_cell = [&](BenchCell& cell) {
    ExperimentConfig local = cfg;
    local.model = cell.model;
    local.regime = cell.regime;
    const auto dir = out_dir / (std::string(model_name(cell.model)) + "-" + std::string(regime_name(cell.regime)));
    try {
      cell.outcome = run_experiment(local, frame, dir);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };
  const std::size_t width = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : cells.size();
  for (std::size_t begin = 0; begin < cells.size(); begin += width) {
    std::vector<std::future<void>> inflight;
    for (std::size_t i = begin; i < std::min(cells.size(), begin + width); ++i)
      inflight.push_back(std::async(std::launch::async, run_cell, std::ref(cells[i])));
    for (auto& f : inflight) f.get();
  }
  write_text_file(out_dir / "bench.csv", bench_csv(cells));
  write_text_file(out_dir / "bench.md", bench_markdown(cells));
  return cells;
}

std::string bench_csv(const std::vector<BenchCell>& cells) {
  std::string out =
      "model,regime,mae,rmse,pooled_rmse,base_mae,base_rmse,windows,partial,failed_week,fit_count,seconds,"
      "reference_mae,reference_rmse,within_band,error\n";
  for (const auto& c : cells) {
    out += std::string(model_name(c.model)) + "," + std::string(regime_name(c.regime)) + ",";
    if (c.outcome && c.outcome->report.summary) {
      const auto& r = c.outcome->report;
      out += format_number(r.summary->mae) + "," + format_number(r.summary->rmse) + "," +
             format_number(r.summary->pooled_rmse) + "," + format_number(r.base_summary->mae) + "," +
             format_number(r.base_summary->rmse) + "," + std::to_string(r.summary->windows) + "," +
             (r.partial ? "true" : "false") + "," + (r.failed_week ? std::to_string(*r.failed_week) : "") + "," +
             std::to_string(r.fits) + "," + format_number(r.seconds) + ",";
    } else {
      out += ",,,,,0,true,,0,,";
    }
    if (c.reference_mae) {
      out += format_number(*c.reference_mae) + "," + format_number(*c.reference_rmse) + ",";
      if (c.outcome && c.outcome->report.summary)
        out += std::abs(c.outcome->report.summary->mae / *c.reference_mae - 1.0) <= 0.25 ? "true" : "false";
    } else {
      out += ",,";
    }
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += "," + err + "\n";
  }
  return out;
}

std::string bench_markdown(const std::vector<BenchCell>& cells) {
  const bool with_ref = std::any_of(cells.begin(), cells.end(), [](const BenchCell& c) { return c.reference_mae; });
  std::string out = "| Model | Regime | MAE | RMSE | Base MAE | Base RMSE | Weeks | Status | Time (s) |";
  out += with_ref ? " Ref MAE | Ref RMSE |\n" : "\n";
  out += "|---|---|---|---|---|---|---|---|---|";
  out += with_ref ? "---|---|\n" : "\n";
  for (const auto& c : cells) {
    out += "| " + std::string(model_name(c.model)) + " | " + std::string(regime_name(c.regime)) + " | ";
    if (c.outcome && c.outcome->report.summary) {
      const auto& r = c.outcome->report;
      const std::string status =
          r.partial ? "partial (stopped at week " + std::to_string(r.failed_week.value_or(0)) + ")" : "complete";
      out += fmt(r.summary->mae) + " | " + fmt(r.summary->rmse) + " | " + fmt(r.base_summary->mae) + " | " +
             fmt(r.base_summary->rmse) + " | " + std::to_string(r.summary->windows) + " | " + status + " | " +
             fmt(r.seconds) + " |";
    } else {
      out += "- | - | - | - | 0 | failed | - |";
    }
    if (with_ref)
      out += c.reference_mae ? " " + fmt(*c.reference_mae) + " | " + fmt(*c.reference_rmse) + " |" : " - | - |";
    out += "\n";
  }
  return out;
}

}  // namespace aethercast

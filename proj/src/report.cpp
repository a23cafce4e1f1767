#include "aethercast/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "aethercast/error.hpp"
#include "aethercast/ingest.hpp"

namespace aethercast {

namespace fs = std::filesystem;

WindowScore score_window(std::span<const double> actual, std::span<const double> pred, std::size_t week) {
  if (actual.size() != pred.size())
    fail(Errc::LengthMismatch, "report: " + std::to_string(actual.size()) + " actuals vs " +
                                   std::to_string(pred.size()) + " predictions");
  if (actual.empty()) fail(Errc::LengthMismatch, "report: empty window");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (!std::isfinite(actual[i]) || !std::isfinite(pred[i]))
      fail(Errc::NonFinite, "report: non-finite value at hour " + std::to_string(i) + " of week " +
                                std::to_string(week));
    const double e = actual[i] - pred[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const auto n = static_cast<double>(actual.size());
  return {week, abs_sum / n, std::sqrt(sq_sum / n), actual.size()};
}

ScoreSummary aggregate(std::span<const WindowScore> scores) {
  if (scores.empty()) fail(Errc::EmptyRun, "report: no scored windows");
  ScoreSummary s;
  double sq = 0.0;
  std::size_t hours = 0;
  const WindowScore* best = &scores.front();
  const WindowScore* worst = &scores.front();
  for (const auto& w : scores) {
    s.mae += w.mae;
    s.rmse += w.rmse;
    sq += w.rmse * w.rmse * static_cast<double>(w.n);
    hours += w.n;
    if (w.mae < best->mae) best = &w;
    if (w.mae > worst->mae) worst = &w;
  }
  const auto k = static_cast<double>(scores.size());
  s.mae /= k;
  s.rmse /= k;
  s.pooled_rmse = std::sqrt(sq / static_cast<double>(hours));
  s.best_week = best->week;
  s.best_mae = best->mae;
  s.worst_week = worst->week;
  s.worst_mae = worst->mae;
  s.windows = scores.size();
  return s;
}

RunReport build_report(const RegimeRun& run, std::string model, std::string regime, double alpha) {
  RunReport r;
  r.model = std::move(model);
  r.regime = std::move(regime);
  r.alpha = alpha;
  for (const auto& rec : run.records) {
    r.scores.push_back(score_window(rec.actual, rec.corrected_pred, rec.week.index));
    r.base_scores.push_back(score_window(rec.actual, rec.base_pred, rec.week.index));
  }
  if (!r.scores.empty()) {
    r.summary = aggregate(r.scores);
    r.base_summary = aggregate(r.base_scores);
  }
  r.partial = run.partial;
  r.failed_week = run.failed_week;
  r.error = run.error;
  r.seconds = run.seconds;
  r.fits = run.fits;
  return r;
}

std::string scores_csv(std::span<const WindowScore> scores) {
  std::string out = "week,mae,rmse\n";
  for (const auto& s : scores)
    out += std::to_string(s.week) + "," + format_number(s.mae) + "," + format_number(s.rmse) + "\n";
  return out;
}

std::string forecasts_csv(std::span<const ForecastRecord> records) {
  std::string out = "week,hour,actual,base_pred,corrected_pred,bias\n";
  for (const auto& r : records)
    for (std::size_t h = 0; h < r.actual.size(); ++h)
      out += std::to_string(r.week.index) + "," + std::to_string(h) + "," + format_number(r.actual[h]) + "," +
             format_number(r.base_pred[h]) + "," + format_number(r.corrected_pred[h]) + "," +
             format_number(r.bias) + "\n";
  return out;
}

std::string forecast_trace_csv(std::span<const ForecastRecord> records, const std::string& target_name) {
  std::string out = "timestamp," + target_name + ",base_pred,corrected_pred\n";
  for (const auto& r : records)
    for (std::size_t h = 0; h < r.actual.size(); ++h)
      out += format_iso8601(r.timestamps[h]) + "," + format_number(r.actual[h]) + "," +
             format_number(r.base_pred[h]) + "," + format_number(r.corrected_pred[h]) + "\n";
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Panel {
  double x0, y0, w, h;
};

std::string polyline(const Panel& p, std::span<const double> values, double lo, double hi, const char* color,
                     const char* dash) {
  std::string pts;
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double x = p.x0 + p.w * static_cast<double>(i) / static_cast<double>(kHoursPerWeek);
    const double y = p.y0 + p.h - p.h * (values[i] - lo) / span;
    pts += fmt(x) + "," + fmt(y) + " ";
  }
  std::string out = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\"";
  if (dash) out += " stroke-dasharray=\"" + std::string(dash) + "\"";
  return out + " points=\"" + pts + "\"/>\n";
}

std::string week_panel(const Panel& p, const ForecastRecord& r, const std::string& title) {
  double lo = r.actual.front(), hi = r.actual.front();
  for (const auto* v : {&r.actual, &r.base_pred, &r.corrected_pred})
    for (double x : *v) lo = std::min(lo, x), hi = std::max(hi, x);
  std::string out;
  out += "<rect x=\"" + fmt(p.x0) + "\" y=\"" + fmt(p.y0) + "\" width=\"" + fmt(p.w) + "\" height=\"" + fmt(p.h) +
         "\" fill=\"none\" stroke=\"#888\"/>\n";
  out += "<text x=\"" + fmt(p.x0) + "\" y=\"" + fmt(p.y0 - 8) + "\" font-size=\"13\">" + escape_xml(title) +
         "</text>\n";
  for (int tick = 0; tick <= 168; tick += 24) {
    const double x = p.x0 + p.w * tick / 168.0;
    out += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(p.y0 + p.h + 14) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + std::to_string(tick) + "</text>\n";
  }
  out += "<text x=\"" + fmt(p.x0 - 6) + "\" y=\"" + fmt(p.y0 + 10) + "\" font-size=\"10\" text-anchor=\"end\">" +
         fmt(hi) + "</text>\n";
  out += "<text x=\"" + fmt(p.x0 - 6) + "\" y=\"" + fmt(p.y0 + p.h) + "\" font-size=\"10\" text-anchor=\"end\">" +
         fmt(lo) + "</text>\n";
  out += polyline(p, r.actual, lo, hi, "#222", nullptr);
  if (r.base_pred != r.corrected_pred) out += polyline(p, r.base_pred, lo, hi, "#999", "4 3");
  out += polyline(p, r.corrected_pred, lo, hi, "#1f6fd1", nullptr);
  return out;
}

}  // namespace

std::string best_worst_svg(const RunReport& report, std::span<const ForecastRecord> records) {
  const double width = 900, height = 560;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"560\" "
                    "font-family=\"sans-serif\">\n<rect width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
                    "\" fill=\"white\"/>\n";
  out += "<text x=\"70\" y=\"22\" font-size=\"15\">" + escape_xml(report.model + " / " + report.regime) +
         "  (actual: dark, prediction: blue, uncorrected: dashed)</text>\n";
  if (!report.summary) return out + "<text x=\"70\" y=\"60\">no completed weeks</text>\n</svg>\n";
  auto find = [&](std::size_t week) -> const ForecastRecord* {
    for (const auto& r : records)
      if (r.week.index == week) return &r;
    return nullptr;
  };
  const auto& s = *report.summary;
  if (const auto* best = find(s.best_week))
    out += week_panel({70, 60, 800, 190}, *best,
                      "best week " + std::to_string(s.best_week) + "  MAE " + fmt(s.best_mae));
  if (const auto* worst = find(s.worst_week))
    out += week_panel({70, 320, 800, 190}, *worst,
                      "worst week " + std::to_string(s.worst_week) + "  MAE " + fmt(s.worst_mae));
  out += "<text x=\"470\" y=\"550\" font-size=\"11\" text-anchor=\"middle\">hour of week</text>\n";
  return out + "</svg>\n";
}

std::string relevance_svg(const RelevanceReport& report) {
  const double bar_h = 22, top = 40, left = 110, width = 300;
  const double height = top + bar_h * static_cast<double>(report.entries.size()) * 1.0 + 30;
  double max_mi = 0.0;
  for (const auto& e : report.entries) max_mi = std::max(max_mi, e.mi);
  if (!(max_mi > 0.0)) max_mi = 1.0;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"820\" height=\"" + fmt(height) +
                    "\" font-family=\"sans-serif\">\n<rect width=\"820\" height=\"" + fmt(height) +
                    "\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(left) + "\" y=\"24\" font-size=\"13\">Pearson correlation</text>\n";
  out += "<text x=\"" + fmt(left + width + 110) + "\" y=\"24\" font-size=\"13\">mutual information (nats)</text>\n";
  for (std::size_t i = 0; i < report.entries.size(); ++i) {
    const auto& e = report.entries[i];
    const double y = top + bar_h * static_cast<double>(i);
    out += "<text x=\"" + fmt(left - 8) + "\" y=\"" + fmt(y + 14) + "\" font-size=\"11\" text-anchor=\"end\">" +
           escape_xml(e.feature) + "</text>\n";
    const double mid = left + width / 2;
    const double len = std::abs(e.pearson) * width / 2;
    const double x = e.pearson >= 0 ? mid : mid - len;
    out += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y + 3) + "\" width=\"" + fmt(len) + "\" height=\"" +
           fmt(bar_h - 6) + "\" fill=\"" + (e.pearson >= 0 ? "#c0504d" : "#4f81bd") + "\"/>\n";
    const double mx = left + width + 110;
    out += "<rect x=\"" + fmt(mx) + "\" y=\"" + fmt(y + 3) + "\" width=\"" + fmt(e.mi / max_mi * width) +
           "\" height=\"" + fmt(bar_h - 6) + "\" fill=\"#9bbb59\"/>\n";
    out += "<text x=\"" + fmt(mx + e.mi / max_mi * width + 4) + "\" y=\"" + fmt(y + 14) + "\" font-size=\"10\">" +
           fmt(e.mi) + "</text>\n";
  }
  return out + "</svg>\n";
}

namespace {

nlohmann::json summary_json(const std::optional<ScoreSummary>& s) {
  if (!s) return nullptr;
  return {{"mae", s->mae},           {"rmse", s->rmse},         {"pooled_rmse", s->pooled_rmse},
          {"best_week", s->best_week}, {"best_mae", s->best_mae}, {"worst_week", s->worst_week},
          {"worst_mae", s->worst_mae}, {"windows", s->windows}};
}

}  // namespace

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json j = {
      {"model", r.model},
      {"regime", r.regime},
      {"alpha", r.alpha},
      {"partial", r.partial},
      {"failed_week", r.failed_week ? nlohmann::json(*r.failed_week) : nlohmann::json(nullptr)},
      {"error", r.error},
      {"seconds", r.seconds},
      {"fits", r.fits},
      {"aggregate", summary_json(r.summary)},
      {"base_aggregate", summary_json(r.base_summary)},
  };
  return j;
}

void emit_report(const RunReport& report, std::span<const ForecastRecord> records, const fs::path& out_dir,
                 const nlohmann::json& extra) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(Errc::IoError, "report: cannot create '" + out_dir.string() + "': " + ec.message());
  write_text_file(out_dir / "scores.csv", scores_csv(report.scores));
  write_text_file(out_dir / "forecasts.csv", forecasts_csv(records));
  write_text_file(out_dir / "forecast_trace.csv", forecast_trace_csv(records));
  write_text_file(out_dir / "best_worst.svg", best_worst_svg(report, records));

  nlohmann::json manifest = to_json(report);
  nlohmann::json weeks = nlohmann::json::array();
  for (const auto& r : records)
    weeks.push_back({{"week", r.week.index},
                     {"start", format_iso8601(r.week.start)},
                     {"hours", r.actual.size()},
                     {"bias", r.bias},
                     {"train_rows", r.train_rows},
                     {"fit_seconds", r.fit_seconds}});
  manifest["weeks"] = weeks;
  nlohmann::json base = nlohmann::json::array();
  for (const auto& s : report.base_scores) base.push_back({{"week", s.week}, {"mae", s.mae}, {"rmse", s.rmse}});
  manifest["base_scores"] = base;
  if (extra.is_object())
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<ForecastRecord> load_records(const fs::path& run_dir) {
  std::ifstream mf(run_dir / "manifest.json");
  if (!mf) fail(Errc::IoError, "report: no manifest.json in '" + run_dir.string() + "'");
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, "report: manifest.json: " + std::string(e.what()));
  }
  std::map<std::size_t, ForecastRecord> by_week;
  const std::string model = manifest.value("model", "");
  const std::string regime = manifest.value("regime", "");
  for (const auto& w : manifest.at("weeks")) {
    ForecastRecord r;
    r.week.index = w.at("week").get<std::size_t>();
    r.week.start = parse_iso8601(w.at("start").get<std::string>());
    r.bias = w.value("bias", 0.0);
    r.train_rows = w.value("train_rows", std::size_t{0});
    r.fit_seconds = w.value("fit_seconds", 0.0);
    r.model_tag = model;
    r.regime_tag = regime;
    by_week.emplace(r.week.index, std::move(r));
  }

  std::ifstream in(run_dir / "forecasts.csv");
  if (!in) fail(Errc::IoError, "report: no forecasts.csv in '" + run_dir.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "week,hour,actual,base_pred,corrected_pred,bias")
    fail(Errc::ParseError, "report: forecasts.csv:1: unexpected header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 6) fail(Errc::ParseError, "report: forecasts.csv:" + std::to_string(lineno) + ": expected 6 fields");
    try {
      const auto week = static_cast<std::size_t>(std::stoul(f[0]));
      const auto hour = static_cast<EpochSeconds>(std::stol(f[1]));
      auto it = by_week.find(week);
      if (it == by_week.end())
        fail(Errc::ParseError, "report: forecasts.csv:" + std::to_string(lineno) + ": week not in manifest");
      auto& r = it->second;
      r.timestamps.push_back(r.week.start + hour * kSecondsPerHour);
      r.actual.push_back(std::stod(f[2]));
      r.base_pred.push_back(std::stod(f[3]));
      r.corrected_pred.push_back(std::stod(f[4]));
      r.residuals.push_back(r.actual.back() - r.base_pred.back());
    } catch (const std::logic_error&) {
      fail(Errc::ParseError, "report: forecasts.csv:" + std::to_string(lineno) + ": bad number");
    }
  }
  std::vector<ForecastRecord> out;
  for (auto& [week, r] : by_week) {
    r.week.horizon_hours = r.actual.size();
    r.week.offset = (r.week.index - 1) * kHoursPerWeek;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace aethercast

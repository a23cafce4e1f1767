#include "aethercast/aethercast.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "aethercast/config.hpp"
#include "aethercast/error.hpp"
#include "aethercast/experiment.hpp"
#include "aethercast/ingest.hpp"
#include "aethercast/synthetic.hpp"

struct ac_config {
  aethercast::ExperimentConfig value;
};

struct ac_frame {
  aethercast::HourlyFrame value;
};

struct ac_report {
  aethercast::RunReport report;
  std::vector<aethercast::ForecastRecord> records;
};

namespace {

using aethercast::Errc;

thread_local std::string g_last_error;

ac_status status_for(Errc code) {
  switch (code) {
    case Errc::UnknownKey:
    case Errc::InvalidValue:
    case Errc::MissingApiKey:
      return AC_ERR_CONFIG;
    case Errc::InvalidArgument:
      return AC_ERR_INVALID_ARGUMENT;
    case Errc::IoError:
      return AC_ERR_IO;
    case Errc::ParseError:
    case Errc::SchemaError:
      return AC_ERR_PARSE;
    case Errc::HttpError:
    case Errc::RangeEmpty:
      return AC_ERR_NETWORK;
    case Errc::DuplicateTimestamp:
    case Errc::GridGap:
    case Errc::OffGrid:
    case Errc::EmptySegment:
    case Errc::EmptyIntersection:
    case Errc::ColumnCollision:
    case Errc::ZeroVariance:
    case Errc::MissingColumn:
    case Errc::IncompleteWeek:
    case Errc::LengthMismatch:
    case Errc::NonFinite:
      return AC_ERR_DATA;
    case Errc::TooShort:
    case Errc::NumericalDivergence:
    case Errc::OptimizerFailure:
    case Errc::NonFiniteObjective:
    case Errc::DimensionMismatch:
    case Errc::SingularSystem:
    case Errc::NonFiniteLoss:
      return AC_ERR_MODEL;
    case Errc::EmptyRun:
      return AC_ERR_EMPTY_RUN;
  }
  return AC_ERR_INTERNAL;
}

ac_status set_error(ac_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
ac_status guarded(F&& body) {
  try {
    body();
    return AC_OK;
  } catch (const aethercast::Error& e) {
    return set_error(status_for(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(AC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(AC_ERR_INTERNAL, e.what());
  }
}

#define AC_REQUIRE(ptr)                                                                 \
  do {                                                                                  \
    if ((ptr) == nullptr) return set_error(AC_ERR_INVALID_ARGUMENT, #ptr " is null"); \
  } while (0)

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ac_version(void) { return "0.1.0"; }

const char* ac_status_name(ac_status status) {
  switch (status) {
    case AC_OK: return "ok";
    case AC_ERR_CONFIG: return "config";
    case AC_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case AC_ERR_IO: return "io";
    case AC_ERR_PARSE: return "parse";
    case AC_ERR_NETWORK: return "network";
    case AC_ERR_DATA: return "data";
    case AC_ERR_MODEL: return "model";
    case AC_ERR_EMPTY_RUN: return "empty-run";
    case AC_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ac_last_error(void) { return g_last_error.c_str(); }

void ac_string_free(char* s) { std::free(s); }

ac_status ac_config_new(ac_config** out) {
  AC_REQUIRE(out);
  return guarded([&] { *out = new ac_config{}; });
}

ac_status ac_config_load(const char* path, ac_config** out) {
  AC_REQUIRE(out);
  return guarded([&] {
    *out = new ac_config{path ? aethercast::parse_config(path) : aethercast::ExperimentConfig{}};
  });
}

ac_status ac_config_set(ac_config* cfg, const char* key, const char* value) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(key);
  AC_REQUIRE(value);
  return guarded([&] { aethercast::set_config_value(cfg->value, key, value); });
}

ac_status ac_config_validate(const ac_config* cfg) {
  AC_REQUIRE(cfg);
  return guarded([&] { cfg->value.validate(); });
}

ac_status ac_config_to_json(const ac_config* cfg, char** out_json) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_json);
  return guarded([&] { *out_json = copy_string(aethercast::to_json(cfg->value).dump(2)); });
}

ac_status ac_config_keys(char** out_json) {
  AC_REQUIRE(out_json);
  return guarded([&] { *out_json = copy_string(nlohmann::json(aethercast::config_keys()).dump()); });
}

void ac_config_free(ac_config* cfg) { delete cfg; }

ac_status ac_frame_load(const ac_config* cfg, ac_frame** out) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out);
  return guarded([&] { *out = new ac_frame{aethercast::load_frame(cfg->value)}; });
}

ac_status ac_frame_load_csv(const char* path, ac_frame** out) {
  AC_REQUIRE(path);
  AC_REQUIRE(out);
  return guarded([&] { *out = new ac_frame{aethercast::load_csv(path)}; });
}

ac_status ac_frame_save_csv(const ac_frame* frame, const char* path) {
  AC_REQUIRE(frame);
  AC_REQUIRE(path);
  return guarded([&] { aethercast::save_csv(frame->value, path); });
}

ac_status ac_frame_shape(const ac_frame* frame, size_t* rows, size_t* cols) {
  AC_REQUIRE(frame);
  if (rows) *rows = frame->value.rows();
  if (cols) *cols = frame->value.cols();
  return AC_OK;
}

ac_status ac_frame_column(const ac_frame* frame, const char* name, const double** data, size_t* n) {
  AC_REQUIRE(frame);
  AC_REQUIRE(name);
  AC_REQUIRE(data);
  AC_REQUIRE(n);
  return guarded([&] {
    const auto col = frame->value.column(name);
    *data = col.data();
    *n = col.size();
  });
}

ac_status ac_frame_weekly_windows(const ac_frame* frame, double split_ratio, size_t* windows) {
  AC_REQUIRE(frame);
  AC_REQUIRE(windows);
  return guarded([&] {
    *windows = aethercast::weekly_windows(aethercast::chrono_split(frame->value, split_ratio).test).size();
  });
}

void ac_frame_free(ac_frame* frame) { delete frame; }

ac_status ac_fetch(const ac_config* cfg, const char* out_csv) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_csv);
  return guarded([&] {
    auto c = cfg->value;
    c.source = aethercast::DataSource::Fetch;
    aethercast::save_csv(aethercast::load_frame(c), out_csv);
  });
}

ac_status ac_synth(const ac_config* cfg, const char* out_csv) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_csv);
  return guarded([&] { aethercast::save_csv(aethercast::make_synthetic(cfg->value.synthetic), out_csv); });
}

ac_status ac_prepare(const ac_config* cfg, const char* out_dir) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_dir);
  return guarded([&] { aethercast::prepare_dataset(cfg->value, out_dir); });
}

ac_status ac_select_features(const ac_config* cfg, const char* out_dir, char** out_json) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_dir);
  return guarded([&] {
    const auto rel = aethercast::write_selection(cfg->value, out_dir);
    if (out_json) {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& e : rel.entries)
        j.push_back({{"feature", e.feature}, {"pearson", e.pearson}, {"mi", e.mi}, {"rank", e.rank}});
      *out_json = copy_string(j.dump(2));
    }
  });
}

ac_status ac_run(const ac_config* cfg, const char* out_dir, ac_report** out) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_dir);
  return guarded([&] {
    auto outcome = aethercast::run_experiment(cfg->value, out_dir);
    if (out) *out = new ac_report{std::move(outcome.report), std::move(outcome.records)};
  });
}

ac_status ac_report_reemit(const char* run_dir, ac_report** out) {
  AC_REQUIRE(run_dir);
  return guarded([&] {
    auto report = aethercast::reemit_report(run_dir);
    if (out) *out = new ac_report{std::move(report), aethercast::load_records(run_dir)};
  });
}

ac_status ac_report_summary(const ac_report* report, ac_summary* out) {
  AC_REQUIRE(report);
  AC_REQUIRE(out);
  const auto& r = report->report;
  if (!r.summary) return set_error(AC_ERR_EMPTY_RUN, "report: no scored windows");
  *out = ac_summary{r.summary->mae,
                    r.summary->rmse,
                    r.summary->pooled_rmse,
                    r.base_summary->mae,
                    r.base_summary->rmse,
                    r.summary->windows,
                    r.summary->best_week,
                    r.summary->worst_week,
                    r.partial ? 1 : 0,
                    r.failed_week.value_or(0),
                    r.seconds};
  return AC_OK;
}

ac_status ac_report_window_count(const ac_report* report, size_t* n) {
  AC_REQUIRE(report);
  AC_REQUIRE(n);
  *n = report->report.scores.size();
  return AC_OK;
}

ac_status ac_report_window(const ac_report* report, size_t index, ac_window_score* out) {
  AC_REQUIRE(report);
  AC_REQUIRE(out);
  const auto& r = report->report;
  if (index >= r.scores.size())
    return set_error(AC_ERR_INVALID_ARGUMENT, "report: window index " + std::to_string(index) + " out of range");
  const double bias = index < report->records.size() ? report->records[index].bias : 0.0;
  *out = ac_window_score{r.scores[index].week, r.scores[index].mae, r.scores[index].rmse,
                         r.base_scores[index].mae, r.base_scores[index].rmse, bias};
  return AC_OK;
}

ac_status ac_report_to_json(const ac_report* report, char** out_json) {
  AC_REQUIRE(report);
  AC_REQUIRE(out_json);
  return guarded([&] { *out_json = copy_string(aethercast::to_json(report->report).dump(2)); });
}

void ac_report_free(ac_report* report) { delete report; }

ac_status ac_bench(const ac_config* cfg, const char* out_dir, const char* reference_csv, char** out_markdown) {
  AC_REQUIRE(cfg);
  AC_REQUIRE(out_dir);
  return guarded([&] {
    std::vector<aethercast::ReferenceRow> reference;
    if (reference_csv) reference = aethercast::load_reference(reference_csv);
    const auto cells = aethercast::run_bench(cfg->value, out_dir, reference);
    if (std::none_of(cells.begin(), cells.end(), [](const auto& c) { return c.outcome.has_value(); }))
      aethercast::fail(Errc::EmptyRun, "bench: every cell failed; first error: " + cells.front().error);
    if (out_markdown) *out_markdown = copy_string(aethercast::bench_markdown(cells));
  });
}

}  // extern "C"

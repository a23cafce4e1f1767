#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aethercast {

enum class Errc {
  // series
  DuplicateTimestamp,
  GridGap,
  OffGrid,
  EmptySegment,
  // ingest
  HttpError,
  SchemaError,
  RangeEmpty,
  ParseError,
  EmptyIntersection,
  ColumnCollision,
  MissingApiKey,
  // preprocess / featsel
  ZeroVariance,
  MissingColumn,
  // models
  TooShort,
  NumericalDivergence,
  OptimizerFailure,
  NonFiniteObjective,
  DimensionMismatch,
  SingularSystem,
  NonFiniteLoss,
  // regimes / report
  IncompleteWeek,
  LengthMismatch,
  NonFinite,
  EmptyRun,
  IoError,
  // config
  UnknownKey,
  InvalidValue,
  // generic precondition violation
  InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Every failure raised by the library. The code identifies the failure
/// class; the message carries the module-qualified detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

  bool is_config_error() const noexcept {
    return code_ == Errc::UnknownKey || code_ == Errc::InvalidValue ||
           code_ == Errc::MissingApiKey;
  }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace aethercast

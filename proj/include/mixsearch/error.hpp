#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixsearch {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  DuplicateId,
  DuplicatePart,
  MissingPart,
  MissingMean,
  EmptyCalibrationSet,
  EmptyCorpus,
  QueryMissingFromRun,
  ConfigInvalid,
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  Truncated,
  MetaMismatch,
  ParseError,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library. `code()` distinguishes validation
// failures from I/O failures (the CLI maps them to exit codes 1 and 2).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  bool is_io() const noexcept { return code_ == ErrorCode::Io; }

 private:
  ErrorCode code_;
};

}  // namespace mixsearch

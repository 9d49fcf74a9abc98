#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace headzoom {

enum class ErrorCode {
  DegeneratePose,
  InsufficientSamples,
  InvertedLimits,
  ParseError,
  MonotonicityError,
  BadScript,
  NotCalibrated,
  InsufficientData,
  PerfectSeparation,
  ZeroVariance,
  InvalidArgument,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePose: return "DegeneratePose";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::InvertedLimits: return "InvertedLimits";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MonotonicityError: return "MonotonicityError";
    case ErrorCode::BadScript: return "BadScript";
    case ErrorCode::NotCalibrated: return "NotCalibrated";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::PerfectSeparation: return "PerfectSeparation";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Base exception for every recoverable failure in the library. The message
/// always starts with the error code name so CLI output stays greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the leading code.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Error tied to a 1-based line of an input file or script.
class LineError : public Error {
 public:
  LineError(ErrorCode code, std::size_t line, const std::string& detail)
      : Error(code, "line " + std::to_string(line) + ": " + detail), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Same error with `path` prefixed to its detail.
inline Error withPath(const Error& e, const std::string& path) { return Error(e.code(), path + ": " + e.detail()); }

}  // namespace headzoom

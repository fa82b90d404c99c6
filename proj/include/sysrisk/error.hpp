#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sysrisk {

enum class ErrorCode {
  kDimensionMismatch,
  kNonPositiveEquity,
  kMarketImbalance,
  kSupercriticalSystem,
  kNonFiniteOverflow,
  kInfeasibleMargins,
  kKappaOutOfRange,
  kInvalidSpec,
  kDegenerateBank,
  kDegenerateProperty,
  kParseError,
  kUnknownNodeId,
  kSelfLoopEdge,
  kNegativeExposure,
  kDuplicateEdge,
  kMarginMismatch,
  kInvalidArgument,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` is stable and is
// what the CLI reports in its machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ParseError carrying the 1-based line of the offending record (0 if unknown).
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& file, std::size_t line,
             const std::string& message);

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace sysrisk

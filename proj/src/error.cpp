#include "sysrisk/error.hpp"

namespace sysrisk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonPositiveEquity: return "NonPositiveEquity";
    case ErrorCode::kMarketImbalance: return "MarketImbalance";
    case ErrorCode::kSupercriticalSystem: return "SupercriticalSystem";
    case ErrorCode::kNonFiniteOverflow: return "NonFiniteOverflow";
    case ErrorCode::kInfeasibleMargins: return "InfeasibleMargins";
    case ErrorCode::kKappaOutOfRange: return "KappaOutOfRange";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kDegenerateBank: return "DegenerateBank";
    case ErrorCode::kDegenerateProperty: return "DegenerateProperty";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnknownNodeId: return "UnknownNodeId";
    case ErrorCode::kSelfLoopEdge: return "SelfLoopEdge";
    case ErrorCode::kNegativeExposure: return "NegativeExposure";
    case ErrorCode::kDuplicateEdge: return "DuplicateEdge";
    case ErrorCode::kMarginMismatch: return "MarginMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

ParseError::ParseError(ErrorCode code, const std::string& file, std::size_t line,
                       const std::string& message)
    : Error(code, file + ":" + std::to_string(line) + ": " + message),
      file_(file),
      line_(line) {}

}  // namespace sysrisk

#include "bornrate/error.h"

namespace bornrate {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec:
      return "invalid-spec";
    case ErrorCode::kDegenerateSpec:
      return "degenerate-spec";
    case ErrorCode::kTruncation:
      return "truncation";
    case ErrorCode::kDomain:
      return "domain";
    case ErrorCode::kInvalidParameter:
      return "invalid-parameter";
    case ErrorCode::kInsufficientData:
      return "insufficient-data";
    case ErrorCode::kDegenerateData:
      return "degenerate-data";
    case ErrorCode::kOuterRegionViolation:
      return "outer-region-violation";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kSchema:
      return "schema";
    case ErrorCode::kIo:
      return "io";
  }
  return "unknown";
}

ErrorClass Classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kDegenerateSpec:
    case ErrorCode::kTruncation:
    case ErrorCode::kDomain:
    case ErrorCode::kInvalidParameter:
      return ErrorClass::kConfig;
    case ErrorCode::kIo:
      return ErrorClass::kIo;
    default:
      return ErrorClass::kData;
  }
}

}  // namespace bornrate

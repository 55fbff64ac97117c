#ifndef BORNRATE_ERROR_H_
#define BORNRATE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace bornrate {

enum class ErrorCode {
  kInvalidSpec,
  kDegenerateSpec,
  kTruncation,
  kDomain,
  kInvalidParameter,
  kInsufficientData,
  kDegenerateData,
  kOuterRegionViolation,
  kParse,
  kSchema,
  kIo,
};

// Short stable identifier, e.g. "invalid-spec".
std::string_view ToString(ErrorCode code);

// Broad class used for CLI exit codes: config problems, bad data, I/O.
enum class ErrorClass { kConfig, kData, kIo };
ErrorClass Classify(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bornrate

#endif  // BORNRATE_ERROR_H_

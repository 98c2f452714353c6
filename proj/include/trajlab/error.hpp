#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trajlab {

enum class ErrorKind {
  kIo,
  kInvariantViolation,
  kBadMagic,
  kUnsupportedVersion,
  kTruncatedFile,
  kHeaderParseError,
  kParseError,
  kRequiredFieldNaN,
  kTooShort,
  kMissingArticulation,
  kLengthMismatch,
  kUnknownMode,
  kEmptyAllowList,
  kInvalidArgument,
  kEmptyInput,
  kBothZero,
  kMisalignedEpisode,
  kMissingRate,
  kInfeasibleScript,
};

/// Stable name used in error records and exception mapping ("TruncatedFile", ...).
std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace trajlab

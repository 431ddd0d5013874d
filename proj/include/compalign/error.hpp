#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace compalign {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kZeroVector,
  kEmptyInput,
  kBoxOutOfBounds,
  kImageDecode,
  kUnparseableCaption,
  kMalformedReply,
  kDecompositionFailed,
  kProviderError,
  kMissingFixture,
  kInvalidFixture,
  kGroundingEmpty,
  kConfigError,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace compalign

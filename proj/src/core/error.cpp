#include "compalign/error.hpp"

namespace compalign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kBoxOutOfBounds: return "BoxOutOfBounds";
    case ErrorCode::kImageDecode: return "ImageDecode";
    case ErrorCode::kUnparseableCaption: return "UnparseableCaption";
    case ErrorCode::kMalformedReply: return "MalformedReply";
    case ErrorCode::kDecompositionFailed: return "DecompositionFailed";
    case ErrorCode::kProviderError: return "ProviderError";
    case ErrorCode::kMissingFixture: return "MissingFixture";
    case ErrorCode::kInvalidFixture: return "InvalidFixture";
    case ErrorCode::kGroundingEmpty: return "GroundingEmpty";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace compalign

#include "ginet/error.hpp"

namespace ginet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kTruncated: return "Truncated";
    case ErrorCode::kUnknownBand: return "UnknownBand";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMissingBand: return "MissingBand";
    case ErrorCode::kMixedGsd: return "MixedGsd";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kOddDimensions: return "OddDimensions";
    case ErrorCode::kNonDivisible: return "NonDivisible";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingDirectory: return "MissingDirectory";
    case ErrorCode::kDuplicatePath: return "DuplicatePath";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kBadManifest: return "BadManifest";
    case ErrorCode::kGraphConsumed: return "GraphConsumed";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kNumericFailure: return "NumericFailure";
    case ErrorCode::kBadCheckpoint: return "BadCheckpoint";
  }
  return "Unknown";
}

ErrorKind kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return ErrorKind::kUsage;
    case ErrorCode::kGraphConsumed:
    case ErrorCode::kNumericFailure:
      return ErrorKind::kNumeric;
    default:
      return ErrorKind::kData;
  }
}

}  // namespace ginet

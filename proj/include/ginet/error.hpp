#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ginet {

enum class ErrorCode {
  // raster files
  kBadMagic,
  kBadVersion,
  kTruncated,
  kUnknownBand,
  kNonFinite,
  kIo,
  // band / shape contracts
  kMissingBand,
  kMixedGsd,
  kShapeMismatch,
  kOddDimensions,
  kNonDivisible,
  kInvalidArgument,
  // dataset
  kMissingDirectory,
  kDuplicatePath,
  kEmptySplit,
  kBadManifest,
  // autodiff / numerics
  kGraphConsumed,
  kLabelOutOfRange,
  kNumericFailure,
  // checkpoints
  kBadCheckpoint,
};

std::string_view to_string(ErrorCode code);

// Broad class of an error, used by the CLI to choose an exit status.
enum class ErrorKind { kUsage, kData, kNumeric };
ErrorKind kind_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ginet

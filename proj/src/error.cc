#include "dynwm/error.h"

namespace dynwm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kAsymmetryExceedsTolerance: return "AsymmetryExceedsTolerance";
    case ErrorCode::kNotSchurStable: return "NotSchurStable";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kNoExcitationPath: return "NoExcitationPath";
    case ErrorCode::kDwellSearchExceeded: return "DwellSearchExceeded";
    case ErrorCode::kStabilizationFailed: return "StabilizationFailed";
    case ErrorCode::kInvalidRho: return "InvalidRho";
    case ErrorCode::kMissingReplayState: return "MissingReplayState";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIOFailure: return "IOFailure";
  }
  return "Unknown";
}

}  // namespace dynwm

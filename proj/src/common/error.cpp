#include "opscore/common/error.hpp"

namespace opscore {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::UnreachableStart: return "UnreachableStart";
    case ErrorCode::SteppedAfterDone: return "SteppedAfterDone";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NonFiniteObservation: return "NonFiniteObservation";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::UnnormalizedInput: return "UnnormalizedInput";
    case ErrorCode::NegativeInfraction: return "NegativeInfraction";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::EmptyBuffer: return "EmptyBuffer";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::CheckpointLoadError: return "CheckpointLoadError";
    case ErrorCode::ControllerDiverged: return "ControllerDiverged";
    case ErrorCode::InsufficientExperts: return "InsufficientExperts";
    case ErrorCode::SessionTooShort: return "SessionTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
  }
  return "Unknown";
}

}  // namespace opscore

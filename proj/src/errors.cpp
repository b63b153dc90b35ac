#include "gazetk/errors.hpp"

namespace gazetk {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::MissingComponent: return "MissingComponent";
    case ErrorCode::InconsistentResolution: return "InconsistentResolution";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::NonPositiveFeature: return "NonPositiveFeature";
    case ErrorCode::NoGazeInDomain: return "NoGazeInDomain";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NoPlaneFound: return "NoPlaneFound";
    case ErrorCode::NothingSegmented: return "NothingSegmented";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::TooFewProjected: return "TooFewProjected";
    case ErrorCode::TooFewGazePoints: return "TooFewGazePoints";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace gazetk

#pragma once

#include <stdexcept>
#include <string>

namespace gazetk {

enum class ErrorCode {
  // geometry / projection
  BehindCamera,
  FrameMismatch,
  // ingest
  ParseError,
  EmptyLog,
  MissingComponent,
  InconsistentResolution,
  // heatmap
  EmptyWindow,
  OutOfRange,
  // knn
  DimensionMismatch,
  KTooLarge,
  TooFewSamples,
  // gbvs
  EmptyImage,
  NonPositiveFeature,
  NoGazeInDomain,
  // roi
  EmptyHistogram,
  EmptyMask,
  // cloud segmentation
  NoPlaneFound,
  NothingSegmented,
  // multiview
  DegenerateBox,
  TooFewProjected,
  TooFewGazePoints,
  // io / cli
  IoError,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

// Single exception type carrying a machine-checkable code plus a human
// readable message. Callers that care about the failure mode switch on
// code(); everything else just propagates.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gazetk

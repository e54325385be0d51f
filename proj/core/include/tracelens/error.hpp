#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracelens {

// Machine-readable failure codes. The string form (see to_string) is what
// appears in CLI diagnostics and in `{"code","message"}` API error bodies.
enum class ErrorCode {
  kDiffKeyMismatch,
  kScanIo,
  kManifestParse,
  kTraceParse,
  kTraceNesting,
  kFilterFields,
  kEvalMissingField,
  kConstraintParse,
  kConfigParse,
  kAbstractConfigMismatch,
  kZoomMissingTrace,
  kZoomUnknownState,
  kMineTimeout,
  kMineOom,
  kExamUnreachable,
  kExamUnknownState,
  kDiffConfigMismatch,
  kModelParse,
  kServeBind,
  kIo,
  kInvalidArgument,
  kNotFound,
  kVersionConflict,
  kConfigInvalid,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tracelens

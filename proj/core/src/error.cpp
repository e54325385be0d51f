#include "tracelens/error.hpp"

namespace tracelens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDiffKeyMismatch: return "DIFF_KEY_MISMATCH";
    case ErrorCode::kScanIo: return "SCAN_IO";
    case ErrorCode::kManifestParse: return "MANIFEST_PARSE";
    case ErrorCode::kTraceParse: return "TRACE_PARSE";
    case ErrorCode::kTraceNesting: return "TRACE_NESTING";
    case ErrorCode::kFilterFields: return "FILTER_FIELDS";
    case ErrorCode::kEvalMissingField: return "EVAL_MISSING_FIELD";
    case ErrorCode::kConstraintParse: return "CONSTRAINT_PARSE";
    case ErrorCode::kConfigParse: return "CONFIG_PARSE";
    case ErrorCode::kAbstractConfigMismatch: return "ABSTRACT_CONFIG_MISMATCH";
    case ErrorCode::kZoomMissingTrace: return "ZOOM_MISSING_TRACE";
    case ErrorCode::kZoomUnknownState: return "ZOOM_UNKNOWN_STATE";
    case ErrorCode::kMineTimeout: return "MINE_TIMEOUT";
    case ErrorCode::kMineOom: return "MINE_OOM";
    case ErrorCode::kExamUnreachable: return "EXAM_UNREACHABLE";
    case ErrorCode::kExamUnknownState: return "EXAM_UNKNOWN_STATE";
    case ErrorCode::kDiffConfigMismatch: return "DIFF_CONFIG_MISMATCH";
    case ErrorCode::kModelParse: return "MODEL_PARSE";
    case ErrorCode::kServeBind: return "SERVE_BIND";
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kNotFound: return "NOT_FOUND";
    case ErrorCode::kVersionConflict: return "VERSION_CONFLICT";
    case ErrorCode::kConfigInvalid: return "CONFIG_INVALID";
  }
  return "UNKNOWN";
}

}  // namespace tracelens

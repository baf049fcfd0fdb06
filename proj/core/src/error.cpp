#include "kite/error.hpp"

#include <fmt/format.h>

namespace kite {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIoFailure: return "IO_FAILURE";
    case ErrorCode::kEmptySource: return "EMPTY_SOURCE";
    case ErrorCode::kDimMismatch: return "DIM_MISMATCH";
    case ErrorCode::kBadManifest: return "BAD_MANIFEST";
    case ErrorCode::kIndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::kDecodeFailure: return "DECODE_FAILURE";
    case ErrorCode::kTooFewFrames: return "TOO_FEW_FRAMES";
    case ErrorCode::kEmptyCurve: return "EMPTY_CURVE";
    case ErrorCode::kBackendUnreachable: return "BACKEND_UNREACHABLE";
    case ErrorCode::kBackendMalformed: return "BACKEND_MALFORMED";
    case ErrorCode::kMissingRecord: return "MISSING_RECORD";
    case ErrorCode::kTimeout: return "TIMEOUT";
    case ErrorCode::kNoObjects: return "NO_OBJECTS";
    case ErrorCode::kMissingDepth: return "MISSING_DEPTH";
    case ErrorCode::kConfidenceRange: return "CONFIDENCE_RANGE";
    case ErrorCode::kCountMismatch: return "COUNT_MISMATCH";
    case ErrorCode::kInvalidEvidence: return "INVALID_EVIDENCE";
    case ErrorCode::kMissingImages: return "MISSING_IMAGES";
    case ErrorCode::kEmptyQuestion: return "EMPTY_QUESTION";
    case ErrorCode::kGrammarViolation: return "GRAMMAR_VIOLATION";
    case ErrorCode::kNoJsonFound: return "NO_JSON_FOUND";
    case ErrorCode::kSchemaViolation: return "SCHEMA_VIOLATION";
    case ErrorCode::kNoCandidates: return "NO_CANDIDATES";
    case ErrorCode::kInvalidSpec: return "INVALID_SPEC";
  }
  return "UNKNOWN";
}

bool is_backend_error(ErrorCode code) {
  return code == ErrorCode::kBackendUnreachable ||
         code == ErrorCode::kBackendMalformed ||
         code == ErrorCode::kTimeout;
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(fmt::format("[{}] {}: {}", module, to_string(code), message)),
      code_(code),
      module_(std::move(module)) {}

}  // namespace kite

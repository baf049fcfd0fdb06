#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kite {

enum class ErrorCode {
  kInvalidArgument,
  kIoFailure,
  // ingest
  kEmptySource,
  kDimMismatch,
  kBadManifest,
  kIndexOutOfRange,
  kDecodeFailure,
  // saliency
  kTooFewFrames,
  kEmptyCurve,
  // perception / vlm backends
  kBackendUnreachable,
  kBackendMalformed,
  kMissingRecord,
  kTimeout,
  // contact / scene graph / rendering
  kNoObjects,
  kMissingDepth,
  kConfidenceRange,
  kCountMismatch,
  // serializer
  kInvalidEvidence,
  kMissingImages,
  kEmptyQuestion,
  kGrammarViolation,
  // localization parsing
  kNoJsonFound,
  kSchemaViolation,
  kNoCandidates,
  // synthetic episodes
  kInvalidSpec,
};

/// Upper-snake name used in messages and reports, e.g. "DIM_MISMATCH".
std::string_view to_string(ErrorCode code);

/// True for errors caused by an external service rather than user input.
bool is_backend_error(ErrorCode code);

/// The single exception type thrown by the library. `module` names the
/// pipeline stage that raised it ("ingest", "perception", ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace kite

#pragma once

#include <stdexcept>
#include <string>

namespace msgcn {

// Failure categories surfaced by the engine. Tests match on the code, not
// the message text.
enum class ErrorCode {
  kAllTokensFiltered,
  kClassTooSmall,
  kDegenerateCorpus,
  kShapeMismatch,
  kMissingRow,
  kEmptyMask,
  kDivergence,
  kMissingCheckpoint,
  kInvalidConfig,
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAllTokensFiltered: return "AllTokensFiltered";
    case ErrorCode::kClassTooSmall: return "ClassTooSmall";
    case ErrorCode::kDegenerateCorpus: return "DegenerateCorpus";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingRow: return "MissingRow";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kDivergence: return "Divergence";
    case ErrorCode::kMissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace msgcn

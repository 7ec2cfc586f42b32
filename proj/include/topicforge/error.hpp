#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace topicforge {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kMalformedRecord,
  kDuplicateId,
  kUnknownLabel,
  kUnknownTopic,
  kOverlappingGroups,
  kInvalidSpec,
  kEmptyTopic,
  kZeroVector,
  kInvalidStages,
  kInvalidBudget,
  kTargetTooSmall,
  kMissingOrdering,
  kSpawnFailure,
  kHandshakeFailure,
  kEmptyStage,
  kProtocol,
  kLengthMismatch,
  kNoRelevantClaims,
  kEmptyResults,
  kTopicSetMismatch,
  kConfig,
  kTopicFailure,  // strict-mode sweep abort
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above; the C
// API maps them one-to-one onto tf_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace topicforge

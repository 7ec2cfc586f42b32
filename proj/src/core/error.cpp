#include "topicforge/error.hpp"

namespace topicforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kUnknownTopic: return "UnknownTopic";
    case ErrorCode::kOverlappingGroups: return "OverlappingGroups";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kEmptyTopic: return "EmptyTopic";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kInvalidStages: return "InvalidStages";
    case ErrorCode::kInvalidBudget: return "InvalidBudget";
    case ErrorCode::kTargetTooSmall: return "TargetTooSmall";
    case ErrorCode::kMissingOrdering: return "MissingOrdering";
    case ErrorCode::kSpawnFailure: return "SpawnFailure";
    case ErrorCode::kHandshakeFailure: return "HandshakeFailure";
    case ErrorCode::kEmptyStage: return "EmptyStage";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNoRelevantClaims: return "NoRelevantClaims";
    case ErrorCode::kEmptyResults: return "EmptyResults";
    case ErrorCode::kTopicSetMismatch: return "TopicSetMismatch";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kTopicFailure: return "TopicFailure";
  }
  return "Unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace topicforge

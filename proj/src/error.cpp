#include "codetrail/error.hpp"

namespace codetrail {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonCanonicalizable: return "NonCanonicalizable";
    case ErrorCode::PatchMismatch: return "PatchMismatch";
    case ErrorCode::BadTimestamp: return "BadTimestamp";
    case ErrorCode::MalformedEvent: return "MalformedEvent";
    case ErrorCode::WorkspaceUnreadable: return "WorkspaceUnreadable";
    case ErrorCode::WorkspaceClaimed: return "WorkspaceClaimed";
    case ErrorCode::SpoolFull: return "SpoolFull";
    case ErrorCode::DiskError: return "DiskError";
    case ErrorCode::AuthRejected: return "AuthRejected";
    case ErrorCode::ServerUnavailable: return "ServerUnavailable";
    case ErrorCode::Unauthorized: return "Unauthorized";
    case ErrorCode::BodyTooLarge: return "BodyTooLarge";
    case ErrorCode::MalformedBody: return "MalformedBody";
    case ErrorCode::CorruptSegment: return "CorruptSegment";
    case ErrorCode::NoSuchFile: return "NoSuchFile";
    case ErrorCode::BrokenChain: return "BrokenChain";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::NoSuchRun: return "NoSuchRun";
    case ErrorCode::UnknownProfile: return "UnknownProfile";
    case ErrorCode::ParameterMismatch: return "ParameterMismatch";
    case ErrorCode::UnknownExercise: return "UnknownExercise";
    case ErrorCode::DirtyStore: return "DirtyStore";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace codetrail

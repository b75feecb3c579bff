#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codetrail {

enum class ErrorCode {
  InvalidArgument,
  NonCanonicalizable,
  PatchMismatch,
  BadTimestamp,
  MalformedEvent,
  WorkspaceUnreadable,
  WorkspaceClaimed,
  SpoolFull,
  DiskError,
  AuthRejected,
  ServerUnavailable,
  Unauthorized,
  BodyTooLarge,
  MalformedBody,
  CorruptSegment,
  NoSuchFile,
  BrokenChain,
  UnsortedInput,
  NoSuchRun,
  UnknownProfile,
  ParameterMismatch,
  UnknownExercise,
  DirtyStore,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Domain error. Every failure the library reports as an exception carries one of
/// the codes above so callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace codetrail

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "codetrail/event/event.hpp"

namespace codetrail {

enum class ViolationCode {
  MalformedJson,
  MissingField,
  WrongType,
  UnknownField,
  UnsupportedSchemaVersion,
  UnknownKind,
  BadTimestamp,
  PayloadMismatch,
  BadEventId,
  IdMismatch,
  BadActorId,
  EmptyWorkspace,
  EmptyExercise,
  BadPath,
  PathEscape,
  EmptyMessage,
  BadLine,
  LineCountMismatch,
  EmptyHunkList,
  EmptyHunk,
  BadStartLine,
  UnorderedHunks,
  OverlappingHunks,
  BadBaseEventId,
  BadDigest,
  EmptyRunId,
  InvalidUtf8,
  ActorScope,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  std::string detail;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Every violated invariant of a typed event; empty means valid.
std::vector<Violation> validate(const Event& event);

bool has_violation(const std::vector<Violation>& violations, ViolationCode code);

/// Workspace-relative path check used for every payload `file` field.
std::vector<Violation> validate_relative_path(std::string_view path);

/// Hunk list checks shared with apply_diff (ordering, overlap, non-empty hunks).
std::vector<Violation> validate_hunks(const std::vector<Hunk>& hunks);

}  // namespace codetrail

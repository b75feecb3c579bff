#include "codetrail/event/event.hpp"

#include <array>

#include "codetrail/event/canonical.hpp"

namespace codetrail {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "FileOpen", "FileSnapshot", "FileDiff", "FileSave", "Diagnostic", "RunStart", "RunEnd", "Submission", "Heartbeat",
};

constexpr std::array<std::string_view, 4> kLevelNames = {"Debug", "Info", "Warning", "Error"};

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  return std::nullopt;
}

std::string_view to_string(DiagnosticLevel level) { return kLevelNames[static_cast<std::size_t>(level)]; }

std::optional<DiagnosticLevel> parse_diagnostic_level(std::string_view name) {
  for (std::size_t i = 0; i < kLevelNames.size(); ++i)
    if (kLevelNames[i] == name) return static_cast<DiagnosticLevel>(i);
  return std::nullopt;
}

EventKind kind_of(const Payload& payload) { return static_cast<EventKind>(payload.index()); }

const std::string* payload_file(const Payload& payload) {
  return std::visit(
      [](const auto& p) -> const std::string* {
        if constexpr (requires { p.file; })
          return &p.file;
        else
          return nullptr;
      },
      payload);
}

Event make_event(const EventHeader& header, Payload payload) {
  Event e;
  e.kind = kind_of(payload);
  e.client_ts = header.client_ts;
  e.actor_id = header.actor_id;
  e.workspace_id = header.workspace_id;
  e.exercise_id = header.exercise_id;
  e.payload = std::move(payload);
  seal_event_id(e);
  return e;
}

void seal_event_id(Event& event) { event.event_id = compute_event_id(canonicalize(event)); }

bool is_valid_actor_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-')) return false;
  return true;
}

std::uint64_t count_lines(std::string_view text) {
  std::uint64_t n = 0;
  for (char c : text) n += c == '\n';
  if (!text.empty() && text.back() != '\n') ++n;
  return n;
}

std::string normalize_line_endings(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      out.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  while (i < s.size()) {
    const unsigned char c = p[i];
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (p[i + k] & 0x3f);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && (cp < 0x10000 || cp > 0x10ffff)) ||
        (cp >= 0xd800 && cp <= 0xdfff))
      return false;
    i += len;
  }
  return true;
}

}  // namespace codetrail

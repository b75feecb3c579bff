#include "codetrail/analytics/normalize.hpp"

namespace codetrail::analytics {

namespace {

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_' || c == '$'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool is_quote(char c) { return c == '\'' || c == '"' || c == '`'; }

}  // namespace

std::string normalize_message(std::string_view message) {
  std::string lower(message);
  for (char& c : lower)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');

  std::string ids;
  ids.reserve(lower.size());
  for (std::size_t i = 0; i < lower.size();) {
    const char q = lower[i];
    if (is_quote(q)) {
      const std::size_t close = lower.find(q, i + 1);
      if (close != std::string::npos && close > i + 1 && ident_start(lower[i + 1])) {
        bool ident = true;
        for (std::size_t j = i + 2; j < close && ident; ++j) ident = ident_char(lower[j]);
        if (ident) {
          ids += q;
          ids += "<id>";
          ids += q;
          i = close + 1;
          continue;
        }
      }
    }
    ids += lower[i++];
  }

  std::string out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size();) {
    if (ids[i] >= '0' && ids[i] <= '9') {
      out += '#';
      while (i < ids.size() && ids[i] >= '0' && ids[i] <= '9') ++i;
    } else {
      out += ids[i++];
    }
  }
  return out;
}

}  // namespace codetrail::analytics

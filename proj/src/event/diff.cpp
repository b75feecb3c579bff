#include "codetrail/event/diff.hpp"

#include <string_view>
#include <unordered_map>

#include "codetrail/error.hpp"
#include "codetrail/event/validate.hpp"

namespace codetrail {

namespace {

// Myers' middle-snake bisection over interned line ids. Marks every line of
// `a` that is deleted and every line of `b` that is inserted.
class LineDiff {
 public:
  LineDiff(const std::vector<int>& a, const std::vector<int>& b)
      : a_(a), b_(b), deleted_(a.size(), false), inserted_(b.size(), false) {}

  void run() { diff(0, static_cast<long>(a_.size()), 0, static_cast<long>(b_.size())); }

  const std::vector<bool>& deleted() const { return deleted_; }
  const std::vector<bool>& inserted() const { return inserted_; }

 private:
  void diff(long a0, long a1, long b0, long b1) {
    while (a0 < a1 && b0 < b1 && a_[a0] == b_[b0]) ++a0, ++b0;
    while (a0 < a1 && b0 < b1 && a_[a1 - 1] == b_[b1 - 1]) --a1, --b1;
    if (a0 == a1) {
      for (long j = b0; j < b1; ++j) inserted_[j] = true;
      return;
    }
    if (b0 == b1) {
      for (long i = a0; i < a1; ++i) deleted_[i] = true;
      return;
    }
    long x = 0, y = 0;
    if (bisect(a0, a1, b0, b1, x, y)) {
      diff(a0, a0 + x, b0, b0 + y);
      diff(a0 + x, a1, b0 + y, b1);
    } else {
      for (long i = a0; i < a1; ++i) deleted_[i] = true;
      for (long j = b0; j < b1; ++j) inserted_[j] = true;
    }
  }

  // Finds a split point (x, y), relative to (a0, b0), that lies on an optimal path.
  bool bisect(long a0, long a1, long b0, long b1, long& split_x, long& split_y) {
    const long n = a1 - a0;
    const long m = b1 - b0;
    const long max_d = (n + m + 1) / 2;
    const long offset = max_d;
    const long width = 2 * max_d + 2;
    std::vector<long> fwd(width, -1), rev(width, -1);
    fwd[offset + 1] = 0;
    rev[offset + 1] = 0;
    const long delta = n - m;
    const bool front = (delta % 2) != 0;
    long k1start = 0, k1end = 0, k2start = 0, k2end = 0;
    for (long d = 0; d < max_d; ++d) {
      for (long k1 = -d + k1start; k1 <= d - k1end; k1 += 2) {
        const long k1o = offset + k1;
        long x1 = (k1 == -d || (k1 != d && fwd[k1o - 1] < fwd[k1o + 1])) ? fwd[k1o + 1] : fwd[k1o - 1] + 1;
        long y1 = x1 - k1;
        while (x1 < n && y1 < m && a_[a0 + x1] == b_[b0 + y1]) ++x1, ++y1;
        fwd[k1o] = x1;
        if (x1 > n) {
          k1end += 2;
        } else if (y1 > m) {
          k1start += 2;
        } else if (front) {
          const long k2o = offset + delta - k1;
          if (k2o >= 0 && k2o < width && rev[k2o] != -1 && x1 >= n - rev[k2o]) {
            split_x = x1;
            split_y = y1;
            return true;
          }
        }
      }
      for (long k2 = -d + k2start; k2 <= d - k2end; k2 += 2) {
        const long k2o = offset + k2;
        long x2 = (k2 == -d || (k2 != d && rev[k2o - 1] < rev[k2o + 1])) ? rev[k2o + 1] : rev[k2o - 1] + 1;
        long y2 = x2 - k2;
        while (x2 < n && y2 < m && a_[a0 + n - x2 - 1] == b_[b0 + m - y2 - 1]) ++x2, ++y2;
        rev[k2o] = x2;
        if (x2 > n) {
          k2end += 2;
        } else if (y2 > m) {
          k2start += 2;
        } else if (!front) {
          const long k1o = offset + delta - k2;
          if (k1o >= 0 && k1o < width && fwd[k1o] != -1) {
            const long x1 = fwd[k1o];
            const long y1 = offset + x1 - k1o;
            if (x1 >= n - x2) {
              split_x = x1;
              split_y = y1;
              return true;
            }
          }
        }
      }
    }
    return false;
  }

  const std::vector<int>& a_;
  const std::vector<int>& b_;
  std::vector<bool> deleted_;
  std::vector<bool> inserted_;
};

}  // namespace

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      return lines;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

std::vector<Hunk> compute_diff(std::string_view old_text, std::string_view new_text) {
  if (old_text == new_text) return {};
  const auto old_lines = split_lines(old_text);
  const auto new_lines = split_lines(new_text);

  std::unordered_map<std::string_view, int> ids;
  auto intern = [&ids](const std::vector<std::string>& lines) {
    std::vector<int> out;
    out.reserve(lines.size());
    for (const auto& l : lines) out.push_back(ids.try_emplace(l, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const auto a = intern(old_lines);
  const auto b = intern(new_lines);

  LineDiff engine(a, b);
  engine.run();
  const auto& del = engine.deleted();
  const auto& ins = engine.inserted();

  std::vector<Hunk> hunks;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (i < a.size() && j < b.size() && !del[i] && !ins[j]) {
      ++i, ++j;
      continue;
    }
    Hunk h;
    h.start_line = static_cast<std::uint32_t>(i + 1);
    while ((i < a.size() && del[i]) || (j < b.size() && ins[j])) {
      if (i < a.size() && del[i])
        h.deleted.push_back(old_lines[i++]);
      else
        h.inserted.push_back(new_lines[j++]);
    }
    hunks.push_back(std::move(h));
  }
  return hunks;
}

std::string apply_diff(std::string_view base_text, const std::vector<Hunk>& hunks) {
  if (hunks.empty()) return std::string(base_text);
  if (auto problems = validate_hunks(hunks); !problems.empty())
    throw Error(ErrorCode::PatchMismatch, std::string(to_string(problems.front().code)) + ": " + problems.front().detail);

  const auto base = split_lines(base_text);
  std::vector<std::string> out;
  out.reserve(base.size());
  std::size_t cursor = 0;  // 0-based index of the next unconsumed base line
  for (const auto& h : hunks) {
    const std::size_t start = h.start_line - 1;
    if (start < cursor || start > base.size() || start + h.deleted.size() > base.size())
      throw Error(ErrorCode::PatchMismatch, "hunk at line " + std::to_string(h.start_line) + " is outside the base text");
    for (std::size_t k = 0; k < h.deleted.size(); ++k) {
      if (base[start + k] != h.deleted[k])
        throw Error(ErrorCode::PatchMismatch, "line " + std::to_string(start + k + 1) + " does not match the deleted text");
    }
    out.insert(out.end(), base.begin() + static_cast<long>(cursor), base.begin() + static_cast<long>(start));
    out.insert(out.end(), h.inserted.begin(), h.inserted.end());
    cursor = start + h.deleted.size();
  }
  out.insert(out.end(), base.begin() + static_cast<long>(cursor), base.end());
  return join_lines(out);
}

std::uint64_t hunk_churn(const std::vector<Hunk>& hunks) {
  std::uint64_t n = 0;
  for (const auto& h : hunks) n += h.deleted.size() + h.inserted.size();
  return n;
}

}  // namespace codetrail

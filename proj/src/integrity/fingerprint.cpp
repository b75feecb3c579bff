#include "codetrail/integrity/fingerprint.hpp"

#include <algorithm>

#include "codetrail/error.hpp"

namespace codetrail::integrity {

namespace {

constexpr std::uint64_t kBase = 0x100000001b3ull * 2 + 1;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::set<std::uint64_t> FingerprintSet::hashes() const {
  std::set<std::uint64_t> out;
  for (const auto& p : prints) out.insert(p.hash);
  return out;
}

std::vector<std::uint64_t> kgram_hashes(const TokenStream& tokens, std::size_t k) {
  const auto& t = tokens.tokens;
  if (k == 0 || t.size() < k) return {};
  std::vector<std::uint64_t> h(t.size());
  std::transform(t.begin(), t.end(), h.begin(), [](const std::string& s) { return mix(fnv1a(s)); });

  std::uint64_t top = 1;  // kBase^(k-1), arithmetic mod 2^64
  for (std::size_t i = 1; i < k; ++i) top *= kBase;
  std::uint64_t rolling = 0;
  for (std::size_t i = 0; i < k; ++i) rolling = rolling * kBase + h[i];

  std::vector<std::uint64_t> out;
  out.reserve(t.size() - k + 1);
  out.push_back(mix(rolling));
  for (std::size_t i = k; i < t.size(); ++i) {
    rolling = (rolling - h[i - k] * top) * kBase + h[i];
    out.push_back(mix(rolling));
  }
  return out;
}

FingerprintSet fingerprint(const TokenStream& tokens, std::size_t k, std::size_t w) {
  if (k < 2 || w < 1) throw Error(ErrorCode::InvalidArgument, "fingerprint needs k >= 2 and w >= 1");
  FingerprintSet out{k, w, {}};
  const auto hashes = kgram_hashes(tokens, k);
  if (hashes.empty()) return out;
  const std::size_t window = std::min(w, hashes.size());
  std::size_t last = hashes.size();  // position of the previous pick
  for (std::size_t start = 0; start + window <= hashes.size(); ++start) {
    std::size_t pick = start;
    for (std::size_t i = start; i < start + window; ++i)
      if (hashes[i] <= hashes[pick]) pick = i;
    if (pick != last) {
      out.prints.push_back({hashes[pick], pick});
      last = pick;
    }
  }
  return out;
}

double content_similarity(const FingerprintSet& a, const FingerprintSet& b) {
  if (a.k != b.k || a.w != b.w)
    throw Error(ErrorCode::ParameterMismatch, "fingerprints built with different (k, w)");
  const auto ha = a.hashes();
  const auto hb = b.hashes();
  std::size_t shared = 0;
  for (auto h : ha) shared += hb.count(h);
  const std::size_t total = ha.size() + hb.size() - shared;
  return total == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(total);
}

}  // namespace codetrail::integrity

#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "codetrail/integrity/tokenizer.hpp"

namespace codetrail::integrity {

inline constexpr std::size_t kDefaultK = 5;
inline constexpr std::size_t kDefaultW = 4;

struct Fingerprint {
  std::uint64_t hash = 0;
  std::size_t position = 0;  // index of the k-gram's first token
  friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
};

struct FingerprintSet {
  std::size_t k = kDefaultK;
  std::size_t w = kDefaultW;
  std::vector<Fingerprint> prints;  // strictly increasing position

  std::set<std::uint64_t> hashes() const;
  friend bool operator==(const FingerprintSet&, const FingerprintSet&) = default;
};

/// 64-bit hash of every k-gram, in order (size - k + 1 of them).
std::vector<std::uint64_t> kgram_hashes(const TokenStream& tokens, std::size_t k);

/// Winnowing: from each window of w consecutive k-gram hashes keep the minimum,
/// the rightmost one on ties. A stream with fewer than w k-grams is one window.
/// Throws Error{InvalidArgument} unless k >= 2 and w >= 1.
FingerprintSet fingerprint(const TokenStream& tokens, std::size_t k = kDefaultK, std::size_t w = kDefaultW);

/// Jaccard index of the two hash sets; 0 when both are empty.
/// Throws Error{ParameterMismatch} when (k, w) differ.
double content_similarity(const FingerprintSet& a, const FingerprintSet& b);

}  // namespace codetrail::integrity

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hiertask {

/// Feature space size for hashed bag-of-words vectors.
inline constexpr std::uint32_t kFeatureDim = 4096;

/// 64-bit FNV-1a over the bytes of `data`.
///
/// offset basis 14695981039346656037, prime 1099511628211. This hash is part
/// of the file-format contract: fixture vectors and golden scores depend on
/// it, so it must not change.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Lowercases and splits on every non-alphanumeric byte, dropping empty
/// fragments. Only ASCII [a-z0-9] survive; anything else separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Sparse, L2-normalized term-frequency vector over hashed dimensions.
/// Entries are strictly positive; an all-empty input yields the zero vector
/// (empty entry map).
struct FeatureVector {
  std::uint32_t dim = kFeatureDim;
  std::map<std::uint32_t, double> entries;

  bool is_zero() const { return entries.empty(); }
  double l2_norm() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Hashes description/keyword/context tokens into one vector. Tokens are
/// salted with their field ("d:", "k:", "c:") before hashing so the same
/// word in different fields lands in different dimensions (modulo hash
/// collisions). Term frequencies accumulate per dimension; the result is
/// L2-normalized unless every field is empty.
FeatureVector embed(std::string_view description,
                    std::span<const std::string> keywords,
                    std::string_view context,
                    std::uint32_t dim = kFeatureDim);

}  // namespace hiertask

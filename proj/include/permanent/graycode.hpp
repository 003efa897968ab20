#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <vector>

namespace permanent {

/// Binary reflected Gray code of g.
constexpr std::uint64_t gray_of(std::uint64_t g) noexcept { return g ^ (g >> 1); }

/// Column flipped when moving from Gray_{g-1} to Gray_g, and whether it was
/// added (+1) or removed (-1).
struct GrayStep {
  int j;
  int s;

  bool operator==(const GrayStep&) const = default;
};

/// Throws DomainError for g = 0.
GrayStep changed_bit(std::uint64_t g);

/// Unchecked variant for inner loops; g must be nonzero.
inline GrayStep changed_bit_unchecked(std::uint64_t g) noexcept {
  const int j = std::countr_zero(g);
  assert((std::uint64_t{1} << j) == (gray_of(g) ^ gray_of(g - 1)));
  return {j, static_cast<int>((gray_of(g) >> j) & 1U) * 2 - 1};
}

/// Changed-bit locations of the k-bit Gray code walk, 1 <= k <= 20.
std::vector<int> cbl_sequence(int k);

/// Column indices selected by Gray_g; requires g < 2^(n-1).
std::vector<int> subset_columns(std::uint64_t g, int n);

} // namespace permanent

#include "permanent/graycode.hpp"

#include <string>

#include "permanent/errors.hpp"

namespace permanent {

GrayStep changed_bit(std::uint64_t g) {
  if (g == 0) {
    throw DomainError("changed_bit is undefined for g = 0");
  }
  return changed_bit_unchecked(g);
}

std::vector<int> cbl_sequence(int k) {
  if (k < 1 || k > 20) {
    throw DomainError("cbl_sequence needs 1 <= k <= 20, got " + std::to_string(k));
  }
  // CBL_k = CBL_{k-1} + [k-1] + reverse(CBL_{k-1}), starting from CBL_1 = [0].
  std::vector<int> seq{0};
  for (int level = 2; level <= k; ++level) {
    std::vector<int> next;
    next.reserve(2 * seq.size() + 1);
    next.insert(next.end(), seq.begin(), seq.end());
    next.push_back(level - 1);
    next.insert(next.end(), seq.rbegin(), seq.rend());
    seq = std::move(next);
  }
  return seq;
}

std::vector<int> subset_columns(std::uint64_t g, int n) {
  if (n < 1 || n > 63 || (g >> (n - 1)) != 0) {
    throw DomainError("subset_columns needs g < 2^(n-1)");
  }
  std::vector<int> cols;
  for (std::uint64_t code = gray_of(g); code != 0; code &= code - 1) {
    cols.push_back(std::countr_zero(code));
  }
  return cols;
}

} // namespace permanent

#include <doctest.h>

#include <algorithm>

#include "permanent/errors.hpp"
#include "permanent/graycode.hpp"
#include "support/oracles.hpp"

using namespace permanent;

TEST_CASE("gray codes differ in exactly the reported bit") {
  for (std::uint64_t g = 1; g < (1U << 14); ++g) {
    const GrayStep st = changed_bit(g);
    const std::uint64_t diff = gray_of(g) ^ gray_of(g - 1);
    REQUIRE(diff == (std::uint64_t{1} << st.j));
    REQUIRE(st.s == (((gray_of(g) >> st.j) & 1U) ? 1 : -1));
  }
  CHECK_THROWS_AS(changed_bit(0), DomainError);
}

TEST_CASE("changed bits near the top of the 63-bit range") {
  const std::uint64_t top = std::uint64_t{1} << 62;
  CHECK(changed_bit(top).j == 62);
  CHECK(changed_bit(top).s == 1);
  CHECK(changed_bit(top - 1).j == 0);
}

TEST_CASE("cbl_sequence of three bits") {
  CHECK(cbl_sequence(3) == std::vector<int>{0, 1, 0, 2, 0, 1, 0});
  CHECK(cbl_sequence(1) == std::vector<int>{0});
  CHECK_THROWS_AS(cbl_sequence(0), DomainError);
  CHECK_THROWS_AS(cbl_sequence(21), DomainError);
}

TEST_CASE("cbl_sequence matches the recursive construction") {
  for (int k = 1; k <= 16; ++k) {
    const auto s = cbl_sequence(k);
    REQUIRE(s == oracle::cbl_recursive(k));
    REQUIRE(std::equal(s.begin(), s.end(), s.rbegin()));
  }
}

TEST_CASE("subset_columns lists the set bits of the Gray code") {
  CHECK(subset_columns(0, 4).empty());
  CHECK(subset_columns(2, 4) == std::vector<int>{0, 1}); // gray(2) = 3
  CHECK(subset_columns(4, 4) == std::vector<int>{1, 2}); // gray(4) = 6
  CHECK_THROWS_AS(subset_columns(8, 4), DomainError);
}

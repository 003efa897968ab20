#include <doctest.h>

#include <random>

#include "permanent/errors.hpp"
#include "permanent/kernels.hpp"
#include "support/oracles.hpp"

using namespace permanent;

TEST_CASE("small hand-checked permanents") {
  const DenseMatrix<double> a(2, {1, 2, 3, 4});
  CHECK(perm_naive(a) == 10.0);
  CHECK(perm_ryser_basic(a) == 10.0);
  CHECK(perm_nw(a).hi == 10.0);
  CHECK(perm_spa(dense_to_sparse(a)).hi == 10.0);
  CHECK(perm_nw(DenseMatrix<double>::identity(7)).hi == 1.0);
  CHECK(perm_nw(DenseMatrix<double>(1, {-2.5})).hi == -2.5);
  CHECK(perm_nw(DenseMatrix<BigInt>::filled(5, BigInt(1))) == 120);
  const Complex i(0, 1);
  const DenseMatrix<Complex> c(2, {i, 1.0, 1.0, i});
  CHECK(std::abs(perm_nw(c)) < 1e-15);
}

TEST_CASE("every kernel agrees with the extended-precision oracle") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 80; ++t) {
    const int n = 1 + t % 8;
    const auto a = oracle::uniform_dense(rng, n);
    const auto ref = oracle::permutation_sum(a);
    const double tol = 1e-11 * std::max(1.0, static_cast<double>(abs(ref)));
    for (Policy p : {Policy::DD, Policy::Kahan, Policy::DQ, Policy::QQ}) {
      REQUIRE(std::abs(static_cast<double>(to_extended(perm_nw(a, p)) - ref)) <= tol);
      REQUIRE(std::abs(static_cast<double>(to_extended(perm_spa(dense_to_sparse(a), p)) - ref)) <= tol);
    }
    REQUIRE(std::abs(perm_naive(a) - static_cast<double>(ref)) <= tol);
    REQUIRE(std::abs(perm_ryser_basic(a) - static_cast<double>(ref)) <= tol);
  }
}

TEST_CASE("complex kernels agree with the oracle") {
  std::mt19937_64 rng(22);
  for (int n = 1; n <= 7; ++n) {
    const auto a = oracle::complex_dense(rng, n);
    const Complex ref = oracle::permutation_sum(a);
    CHECK(std::abs(perm_nw(a) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    CHECK(std::abs(perm_spa(dense_to_sparse(a)) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    CHECK(std::abs(perm_ryser_basic(a) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
  CHECK_THROWS_AS(perm_nw(DenseMatrix<Complex>::identity(2), Policy::QQ), std::invalid_argument);
}

TEST_CASE("integer kernels are exact on both lane widths") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<long long> small(-9, 9);
  std::uniform_int_distribution<long long> big(-(1LL << 50), 1LL << 50);
  for (int n = 1; n <= 7; ++n) {
    for (bool wide : {false, true}) {
      std::vector<BigInt> v(static_cast<std::size_t>(n) * n);
      for (auto& x : v) {
        x = wide ? BigInt(big(rng)) * BigInt(big(rng)) : BigInt(small(rng));
      }
      const DenseMatrix<BigInt> a(n, v);
      const BigInt ref = oracle::permutation_sum(a);
      REQUIRE(perm_nw(a) == ref);
      REQUIRE(perm_spa(dense_to_sparse(a)) == ref);
      REQUIRE(perm_ryser_basic(a) == ref);
    }
  }
}

TEST_CASE("integer permanent of a constant 20x20 matrix is 20! 3^20") {
  BigInt expected = 1;
  for (int k = 2; k <= 20; ++k) {
    expected *= k;
  }
  for (int k = 0; k < 20; ++k) {
    expected *= 3;
  }
  CHECK(perm_nw(DenseMatrix<BigInt>::filled(20, BigInt(3))) == expected);
}

TEST_CASE("sparse kernel on structurally sparse inputs") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 60; ++t) {
    const int n = 2 + t % 8;
    const auto s = oracle::sparse_integer(rng, n, 0.35);
    REQUIRE(perm_spa(s) == oracle::permutation_sum(oracle::densify(s)));
  }
  // An empty row forces a zero permanent.
  const auto z = SparsePair<double>::from_triplets(3, {{0, 0, 1.0}, {1, 1, 1.0}});
  CHECK(perm_spa(z).hi == 0.0);
}

TEST_CASE("kernel domain limits") {
  CHECK_THROWS_AS(perm_naive(DenseMatrix<double>::filled(11, 1.0)), DomainError);
  CHECK_THROWS_AS(perm_spa(SparsePair<double>::from_triplets(0, {})), DomainError);
  CHECK_THROWS_AS(perm_spa(SparsePair<double>::from_triplets(64, {{0, 0, 1.0}})), ImpossibleError);
}

TEST_CASE("permanent invariants: permutation and transposition (property)") {
  std::mt19937_64 rng(25);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 7;
    std::vector<BigInt> v(static_cast<std::size_t>(n) * n);
    std::uniform_int_distribution<int> d(-5, 5);
    for (auto& x : v) {
      x = d(rng);
    }
    const DenseMatrix<BigInt> a(n, v);
    std::vector<int> rows(n), cols(n);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    std::vector<BigInt> w(v.size());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        w[static_cast<std::size_t>(i) * n + j] = a(rows[i], cols[j]);
      }
    }
    const BigInt p = perm_nw(a);
    REQUIRE(perm_nw(DenseMatrix<BigInt>(n, w)) == p);
    REQUIRE(perm_nw(a.transposed()) == p);
    // Scaling one row by c scales the permanent by c.
    std::vector<BigInt> scaled = v;
    for (int j = 0; j < n; ++j) {
      scaled[j] *= 7;
    }
    REQUIRE(perm_nw(DenseMatrix<BigInt>(n, scaled)) == 7 * p);
  }
}

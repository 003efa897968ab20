#include <doctest.h>

#include <random>

#include "permanent/errors.hpp"
#include "permanent/matrix.hpp"
#include "support/oracles.hpp"

using namespace permanent;

TEST_CASE("dense matrix rejects bad shapes and non-finite entries") {
  CHECK_THROWS_AS(DenseMatrix<double>(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(DenseMatrix<double>(64, std::vector<double>(64 * 64, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(DenseMatrix<double>(2, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(DenseMatrix<double>(1, {std::nan("")}), std::invalid_argument);
  CHECK_NOTHROW(DenseMatrix<double>(63, std::vector<double>(63 * 63, 1.0)));
}

TEST_CASE("dense accessors, transpose and column-major layout") {
  const DenseMatrix<double> a(2, {1, 2, 3, 4});
  CHECK(a(0, 1) == 2);
  CHECK(a(1, 0) == 3);
  CHECK(a.transposed()(0, 1) == 3);
  CHECK(a.column_major() == std::vector<double>{1, 3, 2, 4});
  CHECK(DenseMatrix<double>::identity(3)(2, 2) == 1.0);
  CHECK(DenseMatrix<double>::identity(3)(2, 1) == 0.0);
}

TEST_CASE("sparse pair from triplets: sorted, duplicates summed, zeros dropped") {
  const auto s = SparsePair<double>::from_triplets(3, {{2, 1, 5.0}, {0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0},
                                                       {1, 1, 4.0}, {1, 1, -4.0}});
  CHECK(s.nnz() == 3);
  const auto t = s.triplets();
  REQUIRE(t.size() == 3);
  CHECK((t[0].row == 0 && t[0].col == 0 && t[0].value == 2.0));
  CHECK((t[1].row == 0 && t[1].col == 2 && t[1].value == 4.0));
  CHECK((t[2].row == 2 && t[2].col == 1 && t[2].value == 5.0));
  CHECK(s.row_nnz(1) == 0);
  CHECK(s.col_nnz(2) == 1);
  CHECK(s.ccs().rids == std::vector<int>{0, 2, 0});
  CHECK_THROWS_AS(SparsePair<double>::from_triplets(2, {{2, 0, 1.0}}), std::invalid_argument);
}

TEST_CASE("CRS/CCS coupling is validated") {
  CrsMatrix<double> crs{2, {0, 1, 2}, {0, 1}, {1.0, 2.0}};
  CcsMatrix<double> ccs{2, {0, 1, 2}, {0, 1}, {1.0, 2.0}};
  CHECK_NOTHROW(SparsePair<double>(crs, ccs));
  CcsMatrix<double> wrong{2, {0, 1, 2}, {1, 0}, {1.0, 2.0}};
  CHECK_THROWS_AS(SparsePair<double>(crs, wrong), StructuralError);
  CrsMatrix<double> unsorted{2, {0, 2, 2}, {1, 0}, {1.0, 2.0}};
  CHECK_THROWS_AS(unsorted.validate(), StructuralError);
}

TEST_CASE("dense/sparse round trip and transposition (property)") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const int n = 1 + t % 9;
    const auto s = oracle::sparse_real(rng, n, 0.4);
    if (s.nnz() == 0) {
      continue;
    }
    const auto d = sparse_to_dense(s);
    CHECK(dense_to_sparse(d).triplets().size() == s.nnz());
    CHECK(sparse_to_dense(dense_to_sparse(d)) == d);
    CHECK(sparse_to_dense(s.transposed()) == d.transposed());
    CHECK(s.transposed().transposed().crs().cids == s.crs().cids);
    CHECK(density(s) == doctest::Approx(static_cast<double>(s.nnz()) / (n * n)));
  }
}

TEST_CASE("zero tolerance drops small entries") {
  const DenseMatrix<double> a(2, {1.0, 1e-14, -1e-13, 2.0});
  CHECK(dense_to_sparse(a).nnz() == 4);
  CHECK(dense_to_sparse(a, 1e-12).nnz() == 2);
  CHECK_THROWS_AS(dense_to_sparse(a, -1.0), std::invalid_argument);
}

TEST_CASE("row sums, dimension and kind") {
  const DenseMatrix<double> a(2, {1, 2, 3, 4});
  CHECK(row_sums(a) == std::vector<double>{3, 7});
  const AnySparse s = SparsePair<BigInt>::from_triplets(2, {{0, 0, BigInt(1)}});
  CHECK(dimension(s) == 2);
  CHECK(kind_of(s) == ScalarKind::integer);
  CHECK_THROWS_AS(density(SparsePair<double>::from_triplets(0, {})), DomainError);
}

#pragma once

#include <cstddef>
#include <span>
#include <tuple>
#include <variant>
#include <vector>

#include "permanent/scalar.hpp"

namespace permanent {

/// Largest dimension a Gray-code kernel accepts: the code fits one 64-bit word.
inline constexpr int kMaxKernelDim = 63;

/// Sparse inputs may be larger than kMaxKernelDim; preprocessing can shrink them.
inline constexpr int kMaxSparseDim = 1 << 20;

/// Square row-major matrix, immutable after construction.
template <MatrixScalar T>
class DenseMatrix {
public:
  /// Throws std::invalid_argument unless 1 <= n <= 63, data has n*n entries,
  /// and all entries are finite.
  DenseMatrix(int n, std::vector<T> row_major);

  static DenseMatrix filled(int n, const T& value);
  static DenseMatrix identity(int n);

  int n() const noexcept { return n_; }
  const T& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const T> data() const noexcept { return data_; }

  DenseMatrix transposed() const;

  /// Column-major copy, the layout the Gray-code kernels stream through.
  std::vector<T> column_major() const;

  bool operator==(const DenseMatrix&) const = default;

private:
  int n_;
  std::vector<T> data_;
};

template <MatrixScalar T>
struct CrsMatrix {
  int n = 0;
  std::vector<int> rptrs{0};
  std::vector<int> cids;
  std::vector<T> vals;

  std::size_t nnz() const noexcept { return cids.size(); }
  /// Throws StructuralError on any broken invariant.
  void validate() const;
};

template <MatrixScalar T>
struct CcsMatrix {
  int n = 0;
  std::vector<int> cptrs{0};
  std::vector<int> rids;
  std::vector<T> vals;

  std::size_t nnz() const noexcept { return rids.size(); }
  void validate() const;
};

template <MatrixScalar T>
struct Triplet {
  int row;
  int col;
  T value;
};

/// Coupled CRS and CCS views of one matrix. Both sides are checked to describe
/// the same nonzero set on construction.
template <MatrixScalar T>
class SparsePair {
public:
  SparsePair(CrsMatrix<T> crs, CcsMatrix<T> ccs);

  /// Builds both layouts from coordinate entries. Duplicate coordinates are
  /// summed; entries that end up exactly zero are dropped.
  static SparsePair from_triplets(int n, std::vector<Triplet<T>> entries);

  int n() const noexcept { return crs_.n; }
  std::size_t nnz() const noexcept { return crs_.nnz(); }
  const CrsMatrix<T>& crs() const noexcept { return crs_; }
  const CcsMatrix<T>& ccs() const noexcept { return ccs_; }

  /// Row-major list of (row, col, value).
  std::vector<Triplet<T>> triplets() const;

  /// Transposition swaps the roles of the two layouts; no data is re-sorted.
  SparsePair transposed() const;

  std::size_t row_nnz(int i) const { return static_cast<std::size_t>(crs_.rptrs[i + 1] - crs_.rptrs[i]); }
  std::size_t col_nnz(int j) const { return static_cast<std::size_t>(ccs_.cptrs[j + 1] - ccs_.cptrs[j]); }

private:
  CrsMatrix<T> crs_;
  CcsMatrix<T> ccs_;
};

template <MatrixScalar T>
SparsePair<T> dense_to_sparse(const DenseMatrix<T>& a, double zero_tolerance = 0.0);

/// Requires n >= 1 and n <= kMaxKernelDim.
template <MatrixScalar T>
DenseMatrix<T> sparse_to_dense(const SparsePair<T>& s);

/// nnz / n^2.
template <MatrixScalar T>
double density(const SparsePair<T>& s);

template <MatrixScalar T>
std::vector<T> row_sums(const DenseMatrix<T>& a);

using AnyDense = std::variant<DenseMatrix<double>, DenseMatrix<Complex>, DenseMatrix<BigInt>>;
using AnySparse = std::variant<SparsePair<double>, SparsePair<Complex>, SparsePair<BigInt>>;

int dimension(const AnySparse& s);
ScalarKind kind_of(const AnySparse& s);

} // namespace permanent

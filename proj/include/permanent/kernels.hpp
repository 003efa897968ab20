#pragma once

#include <type_traits>

#include "permanent/matrix.hpp"
#include "permanent/precision.hpp"

namespace permanent {

/// Result type of the Gray-code kernels: real runs keep the double-double
/// tail of the accumulator, complex and integer runs return the entry type.
template <MatrixScalar T>
using PermanentOf = std::conditional_t<std::is_same_v<T, double>, DoubleDouble, T>;

inline constexpr int kNaiveMaxDim = 10;
inline constexpr int kRyserBasicMaxDim = 30;

/// Sum over all n! permutations. Refuses n > 10 with DomainError.
template <MatrixScalar T>
T perm_naive(const DenseMatrix<T>& a);

/// Inclusion-exclusion over all 2^n column subsets, each row sum recomputed
/// from scratch. Independent of the Gray-code machinery; n <= 30.
template <MatrixScalar T>
T perm_ryser_basic(const DenseMatrix<T>& a);

/// Nijenhuis-Wilf Ryser with a Gray-code walk over 2^(n-1) subsets.
///
/// Integer matrices are evaluated exactly (the policy is ignored). Complex
/// matrices accept Policy::DD only; anything else is std::invalid_argument.
template <MatrixScalar T>
PermanentOf<T> perm_nw(const DenseMatrix<T>& a, Policy policy = Policy::DD);

/// Sparse variant: each step touches only the nonzeros of the changed column.
/// Throws ImpossibleError for n > 63 and DomainError for n = 0.
template <MatrixScalar T>
PermanentOf<T> perm_spa(const SparsePair<T>& s, Policy policy = Policy::DD);

/// Plain value of a kernel result.
inline double value_of(const DoubleDouble& v) { return v.hi; }
inline const Complex& value_of(const Complex& v) { return v; }
inline const BigInt& value_of(const BigInt& v) { return v; }

} // namespace permanent

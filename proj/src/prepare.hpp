#pragma once

// Conversion of a matrix into the column data and initial row-sum lanes a
// Gray-code walk needs, plus the dispatch from (scalar kind, policy) to mode.

#include <stdexcept>
#include <string>
#include <vector>

#include "gray_walk.hpp"

namespace permanent::detail {

template <class Mode, MatrixScalar T>
DenseColumns<typename Mode::Entry> dense_columns(const DenseMatrix<T>& a) {
  DenseColumns<typename Mode::Entry> cols;
  cols.n = a.n();
  cols.entries.reserve(static_cast<std::size_t>(a.n()) * a.n());
  for (int j = 0; j < a.n(); ++j) {
    for (int i = 0; i < a.n(); ++i) {
      cols.entries.push_back(Mode::entry(a(i, j)));
    }
  }
  return cols;
}

template <class Mode, MatrixScalar T>
SparseColumns<typename Mode::Entry> sparse_columns(const SparsePair<T>& s) {
  const auto& ccs = s.ccs();
  SparseColumns<typename Mode::Entry> cols;
  cols.n = s.n();
  cols.cptrs = ccs.cptrs;
  cols.rids = ccs.rids;
  cols.vals.reserve(ccs.vals.size());
  for (const auto& v : ccs.vals) {
    cols.vals.push_back(Mode::entry(v));
  }
  return cols;
}

/// x_init[i] = a_{i,n-1} - rowsum_i / 2, row sums taken in column order.
template <class Mode, MatrixScalar T>
std::vector<typename Mode::Lane> initial_lanes(const DenseMatrix<T>& a) {
  const int n = a.n();
  std::vector<typename Mode::Lane> x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) {
    const std::span<const T> row = a.data().subspan(static_cast<std::size_t>(i) * n, n);
    x.push_back(Mode::init_lane(row, a(i, n - 1)));
  }
  return x;
}

template <class Mode, MatrixScalar T>
std::vector<typename Mode::Lane> initial_lanes(const SparsePair<T>& s) {
  const auto& crs = s.crs();
  const int n = s.n();
  std::vector<typename Mode::Lane> x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) {
    const int b = crs.rptrs[i];
    const int e = crs.rptrs[i + 1];
    const std::span<const T> row(crs.vals.data() + b, static_cast<std::size_t>(e - b));
    const T last = (e > b && crs.cids[e - 1] == n - 1) ? crs.vals[e - 1] : T(0);
    x.push_back(Mode::init_lane(row, last));
  }
  return x;
}

/// Row absolute sums decide whether 64-bit lanes and 128-bit products suffice.
/// With y = 2x every lane satisfies |y_i| <= sum_j |a_ij| =: R_i, products are
/// bounded by prod R_i, and a partial adds at most 2^(n-1) of them.
template <class RowValues>
bool fits_fast_integer(int n, const RowValues& rows) {
  constexpr unsigned kLaneBits = 61;
  constexpr unsigned kAccumulatorBits = 125;
  unsigned total_bits = static_cast<unsigned>(n - 1);
  for (const auto& row : rows) {
    BigInt r = 0;
    for (const BigInt& v : row) {
      r += boost::multiprecision::abs(v);
    }
    if (r.is_zero()) {
      continue;
    }
    const unsigned bits = boost::multiprecision::msb(r) + 1;
    if (bits > kLaneBits) {
      return false;
    }
    total_bits += bits;
    if (total_bits > kAccumulatorBits) {
      return false;
    }
  }
  return true;
}

inline bool fits_fast_integer(const DenseMatrix<BigInt>& a) {
  const int n = a.n();
  std::vector<std::span<const BigInt>> rows;
  for (int i = 0; i < n; ++i) {
    rows.push_back(a.data().subspan(static_cast<std::size_t>(i) * n, n));
  }
  return fits_fast_integer(n, rows);
}

inline bool fits_fast_integer(const SparsePair<BigInt>& s) {
  const auto& crs = s.crs();
  std::vector<std::span<const BigInt>> rows;
  for (int i = 0; i < s.n(); ++i) {
    rows.emplace_back(crs.vals.data() + crs.rptrs[i], static_cast<std::size_t>(crs.rptrs[i + 1] - crs.rptrs[i]));
  }
  return fits_fast_integer(s.n(), rows);
}

/// Calls f(Mode{}) with the mode matching the matrix kind and policy.
template <MatrixScalar T, class M, class F>
decltype(auto) with_mode(const M& matrix, Policy policy, F&& f) {
  if constexpr (std::is_same_v<T, double>) {
    switch (policy) {
    case Policy::DD:
      return f(PlainMode{});
    case Policy::Kahan:
      return f(KahanMode{});
    case Policy::DQ:
      return f(DoublePartialQuadMode{});
    case Policy::QQ:
      return f(QuadMode{});
    }
    throw std::invalid_argument("unknown policy");
  } else if constexpr (std::is_same_v<T, Complex>) {
    if (policy != Policy::DD) {
      throw std::invalid_argument("complex matrices support the dd policy only, got " +
                                  std::string(to_string(policy)));
    }
    return f(ComplexMode{});
  } else {
    // Exact arithmetic; the policy has no effect.
    if (fits_fast_integer(matrix)) {
      return f(FastIntegerMode{});
    }
    return f(WideIntegerMode{});
  }
}

/// perm = (-1)^(n-1) * total / 2^(n-1) when the lanes held 2x.
inline BigInt finish_integer(const BigInt& total, int n) {
  const BigInt divisor = BigInt(1) << (n - 1);
  if (total % divisor != 0) {
    throw std::logic_error("integer accumulator is not divisible by 2^(n-1)");
  }
  BigInt result = total / divisor;
  if (n % 2 == 0) {
    result = -result;
  }
  return result;
}

inline std::uint64_t total_iterations(int n) { return (std::uint64_t{1} << (n - 1)) - 1; }

} // namespace permanent::detail

#pragma once

// Test-side reference implementations. None of them call into the library's
// kernels, so agreement with the library is evidence rather than tautology.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "permanent/matrix.hpp"
#include "permanent/precision.hpp"

namespace oracle {

using permanent::BigInt;
using permanent::Complex;
using permanent::DenseMatrix;
using permanent::Extended;
using permanent::SparsePair;
using permanent::Triplet;

/// Sum over permutations with every product and the running sum held in
/// 256-bit binary floating point.
inline Extended permutation_sum(const DenseMatrix<double>& a) {
  const int n = a.n();
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  Extended total = 0;
  do {
    Extended prod = 1;
    for (int i = 0; i < n; ++i) {
      prod *= Extended(a(i, p[i]));
    }
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

inline Complex permutation_sum(const DenseMatrix<Complex>& a) {
  const int n = a.n();
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::complex<long double> total = 0;
  do {
    std::complex<long double> prod = 1;
    for (int i = 0; i < n; ++i) {
      prod *= std::complex<long double>(a(i, p[i]));
    }
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return {static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

inline BigInt permutation_sum(const DenseMatrix<BigInt>& a) {
  const int n = a.n();
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  BigInt total = 0;
  do {
    BigInt prod = 1;
    for (int i = 0; i < n && prod != 0; ++i) {
      prod *= a(i, p[i]);
    }
    total += prod;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

/// Number of perfect matchings of a 0/1 pattern, by depth-first search over
/// rows with a used-column mask.
inline std::uint64_t count_perfect_matchings(const std::vector<std::vector<bool>>& pattern) {
  const int n = static_cast<int>(pattern.size());
  std::uint64_t count = 0;
  std::vector<bool> used(n, false);
  auto dfs = [&](auto&& self, int row) -> void {
    if (row == n) {
      ++count;
      return;
    }
    for (int c = 0; c < n; ++c) {
      if (pattern[row][c] && !used[c]) {
        used[c] = true;
        self(self, row + 1);
        used[c] = false;
      }
    }
  };
  dfs(dfs, 0);
  return count;
}

/// Nijenhuis-Wilf lane vector for subset index g, computed from scratch:
/// x_i = a_{i,n-1} - rowsum_i / 2 + sum of the columns selected by the Gray
/// code of g.
inline std::vector<double> x_from_scratch(const DenseMatrix<double>& a, std::uint64_t g) {
  const int n = a.n();
  const std::uint64_t code = g ^ (g >> 1);
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) {
    double rowsum = 0;
    for (int j = 0; j < n; ++j) {
      rowsum += a(i, j);
    }
    x[i] = a(i, n - 1) - rowsum / 2;
    for (int j = 0; j < n - 1; ++j) {
      if ((code >> j) & 1U) {
        x[i] += a(i, j);
      }
    }
  }
  return x;
}

/// Changed-bit sequence built by the defining recursion
/// CBL_k = CBL_{k-1}, k-1, CBL_{k-1}.
inline std::vector<int> cbl_recursive(int k) {
  if (k == 0) {
    return {};
  }
  auto prev = cbl_recursive(k - 1);
  std::vector<int> out = prev;
  out.push_back(k - 1);
  out.insert(out.end(), prev.begin(), prev.end());
  return out;
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

inline DenseMatrix<double> uniform_dense(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(n) * n);
  for (auto& x : v) {
    x = u(rng);
  }
  return DenseMatrix<double>(n, std::move(v));
}

inline DenseMatrix<Complex> complex_dense(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Complex> v(static_cast<std::size_t>(n) * n);
  for (auto& x : v) {
    x = {u(rng), u(rng)};
  }
  return DenseMatrix<Complex>(n, std::move(v));
}

inline std::vector<std::vector<bool>> random_pattern(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution keep(density);
  std::vector<std::vector<bool>> p(n, std::vector<bool>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      p[i][j] = keep(rng);
    }
  }
  return p;
}

inline DenseMatrix<BigInt> pattern_matrix(const std::vector<std::vector<bool>>& p) {
  const int n = static_cast<int>(p.size());
  std::vector<BigInt> v;
  v.reserve(static_cast<std::size_t>(n) * n);
  for (const auto& row : p) {
    for (bool b : row) {
      v.emplace_back(b ? 1 : 0);
    }
  }
  return DenseMatrix<BigInt>(n, std::move(v));
}

inline SparsePair<double> sparse_real(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution keep(density);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (keep(rng)) {
        t.push_back({i, j, u(rng)});
      }
    }
  }
  return SparsePair<double>::from_triplets(n, t);
}

/// Small nonzero integers in [-3, 3] \ {0}, sparse at the given density.
inline SparsePair<BigInt> sparse_integer(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution keep(density);
  std::uniform_int_distribution<int> v(1, 3);
  std::bernoulli_distribution neg(0.5);
  std::vector<Triplet<BigInt>> t;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (keep(rng)) {
        t.push_back({i, j, BigInt(neg(rng) ? -v(rng) : v(rng))});
      }
    }
  }
  return SparsePair<BigInt>::from_triplets(n, t);
}

/// Dense view of a sparse matrix that may have n = 0 or empty rows; built by
/// the test rather than the library.
template <class T>
DenseMatrix<T> densify(const SparsePair<T>& s) {
  const int n = s.n();
  std::vector<T> v(static_cast<std::size_t>(n) * n, T(0));
  for (const auto& e : s.triplets()) {
    v[static_cast<std::size_t>(e.row) * n + e.col] = e.value;
  }
  return DenseMatrix<T>(n, std::move(v));
}

inline double rel_diff(double got, const Extended& ref) {
  if (ref == 0) {
    return std::abs(got);
  }
  return static_cast<double>(abs((Extended(got) - ref) / ref));
}

inline double rel_diff(double got, double ref) { return rel_diff(got, Extended(ref)); }

} // namespace oracle

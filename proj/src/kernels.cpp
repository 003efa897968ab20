#include "permanent/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "permanent/errors.hpp"
#include "prepare.hpp"

namespace permanent {

namespace {

using detail::Int128;

template <class Mode>
PermanentOf<double> finish_real(const typename Mode::Partial& acc, int n) {
  const double f = (n % 2 == 1) ? 2.0 : -2.0;
  const DoubleDouble v = Mode::value(acc);
  return {v.hi * f, v.lo * f};
}

template <MatrixScalar T, class Mode>
PermanentOf<T> finish(const typename Mode::Partial& acc, int n) {
  if constexpr (std::is_same_v<T, double>) {
    return finish_real<Mode>(acc, n);
  } else if constexpr (std::is_same_v<T, Complex>) {
    return acc * ((n % 2 == 1) ? 2.0 : -2.0);
  } else {
    return detail::finish_integer(detail::to_bigint(acc), n);
  }
}

template <MatrixScalar T, class Mode, class Cols>
PermanentOf<T> run_serial(const Cols& cols, std::vector<typename Mode::Lane> x) {
  const int n = cols.n;
  typename Mode::Partial acc{};
  Mode::accumulate(acc, detail::product<Mode>(std::span<const typename Mode::Lane>(x)), false);
  if (n > 1) {
    detail::walk<Mode>(cols, std::span<typename Mode::Lane>(x), 1, detail::total_iterations(n), acc,
                       detail::CancelToken{});
  }
  return finish<T, Mode>(acc, n);
}

template <MatrixScalar T>
T multiply(const T& a, const T& b) {
  return a * b;
}

} // namespace

template <MatrixScalar T>
T perm_naive(const DenseMatrix<T>& a) {
  const int n = a.n();
  if (n > kNaiveMaxDim) {
    throw DomainError("perm_naive is limited to n <= " + std::to_string(kNaiveMaxDim));
  }
  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  T total(0);
  do {
    T prod(1);
    for (int i = 0; i < n; ++i) {
      prod = multiply(prod, a(i, sigma[i]));
    }
    total += prod;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

template <MatrixScalar T>
T perm_ryser_basic(const DenseMatrix<T>& a) {
  const int n = a.n();
  if (n > kRyserBasicMaxDim) {
    throw DomainError("perm_ryser_basic is limited to n <= " + std::to_string(kRyserBasicMaxDim));
  }
  T total(0);
  const std::uint64_t subsets = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask < subsets; ++mask) {
    T prod(1);
    for (int i = 0; i < n; ++i) {
      T row(0);
      for (int j = 0; j < n; ++j) {
        if ((mask >> j) & 1U) {
          row += a(i, j);
        }
      }
      prod = multiply(prod, row);
    }
    // (-1)^n (-1)^|S| = (-1)^(n - |S|)
    if ((n - std::popcount(mask)) % 2 == 0) {
      total += prod;
    } else {
      total -= prod;
    }
  }
  return total;
}

template <MatrixScalar T>
PermanentOf<T> perm_nw(const DenseMatrix<T>& a, Policy policy) {
  return detail::with_mode<T>(a, policy, [&](auto mode) -> PermanentOf<T> {
    using Mode = decltype(mode);
    return run_serial<T, Mode>(detail::dense_columns<Mode>(a), detail::initial_lanes<Mode>(a));
  });
}

template <MatrixScalar T>
PermanentOf<T> perm_spa(const SparsePair<T>& s, Policy policy) {
  if (s.n() < 1) {
    throw DomainError("the permanent kernels need n >= 1");
  }
  if (s.n() > kMaxKernelDim) {
    throw ImpossibleError("kernel dimension " + std::to_string(s.n()) + " exceeds " +
                          std::to_string(kMaxKernelDim));
  }
  return detail::with_mode<T>(s, policy, [&](auto mode) -> PermanentOf<T> {
    using Mode = decltype(mode);
    return run_serial<T, Mode>(detail::sparse_columns<Mode>(s), detail::initial_lanes<Mode>(s));
  });
}

#define PERMANENT_INSTANTIATE(T)                                                                   \
  template T perm_naive<T>(const DenseMatrix<T>&);                                                 \
  template T perm_ryser_basic<T>(const DenseMatrix<T>&);                                           \
  template PermanentOf<T> perm_nw<T>(const DenseMatrix<T>&, Policy);                               \
  template PermanentOf<T> perm_spa<T>(const SparsePair<T>&, Policy);

PERMANENT_INSTANTIATE(double)
PERMANENT_INSTANTIATE(Complex)
PERMANENT_INSTANTIATE(BigInt)

#undef PERMANENT_INSTANTIATE

} // namespace permanent

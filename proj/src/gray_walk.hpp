#pragma once

// Internal Gray-code walking machinery shared by the serial kernels and the
// parallel engine. A "mode" fixes the arithmetic of one run: the type of the
// row-sum lanes x, of the running product, and of the per-worker partial.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "permanent/errors.hpp"
#include "permanent/graycode.hpp"
#include "permanent/matrix.hpp"
#include "permanent/precision.hpp"

namespace permanent::detail {

using Int128 = __int128;

inline BigInt to_bigint(Int128 v) {
  const bool negative = v < 0;
  // Two's-complement negation of the minimum is never reached: bounds keep
  // |v| < 2^126.
  auto mag = static_cast<unsigned __int128>(negative ? -v : v);
  BigInt out = static_cast<std::uint64_t>(mag >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(mag);
  return negative ? BigInt(-out) : out;
}

inline BigInt to_bigint(const BigInt& v) { return v; }

// --------------------------------------------------------------------------
// Modes
// --------------------------------------------------------------------------

struct PlainMode {
  using Entry = double;
  using Lane = double;
  using Prod = double;
  using Partial = double;

  static Entry entry(double a) { return a; }
  static Lane init_lane(std::span<const double> row, double last) {
    double sum = 0.0;
    for (double v : row) {
      sum += v;
    }
    return last - 0.5 * sum;
  }
  static void step(Lane& x, Entry a, bool add) { x = add ? x + a : x - a; }
  static void mul(Prod& p, const Lane& x) { p *= x; }
  static void accumulate(Partial& acc, const Prod& p, bool negative) { acc = negative ? acc - p : acc + p; }
  static void flush(const Partial& acc, ExactSum& out) { out.add(acc); }
  static DoubleDouble value(const Partial& acc) { return {acc}; }
};

struct KahanMode : PlainMode {
  using Partial = KahanAccumulator;

  static void accumulate(Partial& acc, const Prod& p, bool negative) { acc.add(negative ? -p : p); }
  static void flush(const Partial& acc, ExactSum& out) {
    out.add(acc.sum);
    out.add(acc.compensation);
  }
  static DoubleDouble value(const Partial& acc) { return two_sum(acc.sum, acc.compensation); }
};

struct DoublePartialQuadMode : PlainMode {
  using Partial = DoubleDouble;

  static void accumulate(Partial& acc, const Prod& p, bool negative) { acc = dd_add(acc, negative ? -p : p); }
  static void flush(const Partial& acc, ExactSum& out) { out.add(acc); }
  static DoubleDouble value(const Partial& acc) { return acc; }
};

struct QuadMode {
  using Entry = double;
  using Lane = DoubleDouble;
  using Prod = DoubleDouble;
  using Partial = DoubleDouble;

  static Entry entry(double a) { return a; }
  static Lane init_lane(std::span<const double> row, double last) {
    DoubleDouble sum;
    for (double v : row) {
      sum = dd_add(sum, v);
    }
    return dd_add(DoubleDouble{-0.5 * sum.hi, -0.5 * sum.lo}, last);
  }
  static void step(Lane& x, Entry a, bool add) { x = dd_add(x, add ? a : -a); }
  static void mul(Prod& p, const Lane& x) { p = dd_mul(p, x); }
  static void accumulate(Partial& acc, const Prod& p, bool negative) { acc = dd_add(acc, negative ? -p : p); }
  static void flush(const Partial& acc, ExactSum& out) { out.add(acc); }
  static DoubleDouble value(const Partial& acc) { return acc; }
};

struct ComplexMode {
  using Entry = Complex;
  using Lane = Complex;
  using Prod = Complex;
  using Partial = Complex;

  static Entry entry(const Complex& a) { return a; }
  static Lane init_lane(std::span<const Complex> row, const Complex& last) {
    Complex sum;
    for (const Complex& v : row) {
      sum += v;
    }
    return last - 0.5 * sum;
  }
  static void step(Lane& x, const Entry& a, bool add) { x = add ? x + a : x - a; }
  static void mul(Prod& p, const Lane& x) { p *= x; }
  static void accumulate(Partial& acc, const Prod& p, bool negative) { acc = negative ? acc - p : acc + p; }
};

// Integer lanes hold y = 2x so the half row sums stay integral.
template <class LaneT, class ProdT>
struct IntegerMode {
  using Entry = LaneT;
  using Lane = LaneT;
  using Prod = ProdT;
  using Partial = ProdT;

  static Entry entry(const BigInt& a) { return narrow(BigInt(2 * a)); }
  static Lane init_lane(std::span<const BigInt> row, const BigInt& last) {
    BigInt sum = 0;
    for (const BigInt& v : row) {
      sum += v;
    }
    return narrow(BigInt(2 * last - sum));
  }
  static LaneT narrow(const BigInt& v) {
    if constexpr (std::is_same_v<LaneT, BigInt>) {
      return v;
    } else {
      return v.template convert_to<LaneT>();
    }
  }
  static void step(Lane& x, const Entry& a, bool add) {
    if (add) {
      x += a;
    } else {
      x -= a;
    }
  }
  static void mul(Prod& p, const Lane& x) { p *= static_cast<Prod>(x); }
  static void accumulate(Partial& acc, const Prod& p, bool negative) {
    if (negative) {
      acc -= p;
    } else {
      acc += p;
    }
  }
};

using FastIntegerMode = IntegerMode<std::int64_t, Int128>;
using WideIntegerMode = IntegerMode<BigInt, BigInt>;

// --------------------------------------------------------------------------
// Cancellation
// --------------------------------------------------------------------------

struct CancelToken {
  const std::atomic<bool>* stop = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  void check() const {
    if (stop != nullptr && stop->load(std::memory_order_relaxed)) {
      throw InterruptedError("computation interrupted");
    }
    if (deadline && std::chrono::steady_clock::now() > *deadline) {
      throw TimeoutError("time limit exceeded");
    }
  }
};

inline constexpr std::uint64_t kCancelCheckMask = (std::uint64_t{1} << 16) - 1;

// --------------------------------------------------------------------------
// Column sources
// --------------------------------------------------------------------------

/// Dense matrix in column-major order, converted to mode entries.
template <class Entry>
struct DenseColumns {
  int n = 0;
  std::vector<Entry> entries;

  const Entry* column(int j) const { return entries.data() + static_cast<std::size_t>(j) * n; }
};

/// CCS arrays with mode entries.
template <class Entry>
struct SparseColumns {
  int n = 0;
  std::vector<int> cptrs;
  std::vector<int> rids;
  std::vector<Entry> vals;
};

/// x[i] += column j (unit sign) for every j whose bit is set in Gray_{g}.
template <class Mode>
void add_gray_columns(const DenseColumns<typename Mode::Entry>& cols, std::uint64_t g,
                      std::span<typename Mode::Lane> x) {
  for (std::uint64_t code = gray_of(g); code != 0; code &= code - 1) {
    const int j = std::countr_zero(code);
    const auto* col = cols.column(j);
    for (int i = 0; i < cols.n; ++i) {
      Mode::step(x[i], col[i], true);
    }
  }
}

template <class Mode>
void add_gray_columns(const SparseColumns<typename Mode::Entry>& cols, std::uint64_t g,
                      std::span<typename Mode::Lane> x) {
  for (std::uint64_t code = gray_of(g); code != 0; code &= code - 1) {
    const int j = std::countr_zero(code);
    for (int p = cols.cptrs[j]; p < cols.cptrs[j + 1]; ++p) {
      Mode::step(x[cols.rids[p]], cols.vals[p], true);
    }
  }
}

template <class Mode>
typename Mode::Prod product(std::span<const typename Mode::Lane> x) {
  typename Mode::Prod prod(1);
  for (const auto& v : x) {
    Mode::mul(prod, v);
  }
  return prod;
}

/// Gray-code loop over [first, last] on dense columns, updating x and acc.
template <class Mode>
void walk(const DenseColumns<typename Mode::Entry>& cols, std::span<typename Mode::Lane> x, std::uint64_t first,
          std::uint64_t last, typename Mode::Partial& acc, const CancelToken& cancel) {
  const int n = cols.n;
  for (std::uint64_t g = first; g <= last; ++g) {
    if ((g & kCancelCheckMask) == 0) {
      cancel.check();
    }
    const GrayStep st = changed_bit_unchecked(g);
    const auto* col = cols.column(st.j);
    const bool add = st.s > 0;
    typename Mode::Prod prod(1);
    for (int i = 0; i < n; ++i) {
      Mode::step(x[i], col[i], add);
      Mode::mul(prod, x[i]);
    }
    Mode::accumulate(acc, prod, (g & 1U) != 0);
  }
}

/// Sparse variant: only the nonzeros of the changed column touch x.
template <class Mode>
void walk(const SparseColumns<typename Mode::Entry>& cols, std::span<typename Mode::Lane> x, std::uint64_t first,
          std::uint64_t last, typename Mode::Partial& acc, const CancelToken& cancel) {
  for (std::uint64_t g = first; g <= last; ++g) {
    if ((g & kCancelCheckMask) == 0) {
      cancel.check();
    }
    const GrayStep st = changed_bit_unchecked(g);
    const bool add = st.s > 0;
    for (int p = cols.cptrs[st.j]; p < cols.cptrs[st.j + 1]; ++p) {
      Mode::step(x[cols.rids[p]], cols.vals[p], add);
    }
    typename Mode::Prod prod(1);
    for (const auto& v : x) {
      Mode::mul(prod, v);
    }
    Mode::accumulate(acc, prod, (g & 1U) != 0);
  }
}

} // namespace permanent::detail

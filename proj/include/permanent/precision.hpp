#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "permanent/scalar.hpp"

namespace permanent {

// ---------------------------------------------------------------------------
// Error-free transforms and double-double arithmetic.
//
// Algorithms follow Joldes, Muller & Popescu, "Tight and rigorous error bounds
// for basic building blocks of double-word arithmetic" (TOMS 2017). The
// double-word products rely on std::fma, so this code must be compiled with
// floating-point contraction disabled.
// ---------------------------------------------------------------------------

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double h) : hi(h) {}
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  bool operator==(const DoubleDouble&) const = default;
};

/// hi = fl(a + b), hi + lo = a + b exactly.
inline DoubleDouble two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

/// Same as two_sum, valid when |a| >= |b| (or a = 0).
inline DoubleDouble fast_two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double z = s - a;
  return {s, b - z};
}

/// hi = fl(a * b), hi + lo = a * b exactly (barring underflow).
inline DoubleDouble two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DoubleDouble operator-(const DoubleDouble& x) noexcept { return {-x.hi, -x.lo}; }

/// Double-word plus double, relative error <= 2u^2.
inline DoubleDouble dd_add(const DoubleDouble& x, double y) noexcept {
  const DoubleDouble s = two_sum(x.hi, y);
  const double v = x.lo + s.lo;
  return fast_two_sum(s.hi, v);
}

/// Accurate double-word addition, relative error <= 3u^2 + O(u^3).
inline DoubleDouble dd_add(const DoubleDouble& x, const DoubleDouble& y) noexcept {
  const DoubleDouble s = two_sum(x.hi, y.hi);
  const DoubleDouble t = two_sum(x.lo, y.lo);
  const double c = s.lo + t.hi;
  const DoubleDouble v = fast_two_sum(s.hi, c);
  const double w = t.lo + v.lo;
  return fast_two_sum(v.hi, w);
}

/// Double-word times double, relative error <= 2u^2.
inline DoubleDouble dd_mul(const DoubleDouble& x, double y) noexcept {
  const DoubleDouble c = two_prod(x.hi, y);
  const double cl3 = std::fma(x.lo, y, c.lo);
  return fast_two_sum(c.hi, cl3);
}

/// Double-word product, relative error <= 4u^2 = 2^-104.
inline DoubleDouble dd_mul(const DoubleDouble& x, const DoubleDouble& y) noexcept {
  const DoubleDouble c = two_prod(x.hi, y.hi);
  const double tl0 = x.lo * y.lo;
  const double tl1 = std::fma(x.hi, y.lo, tl0);
  const double cl2 = std::fma(x.lo, y.hi, tl1);
  const double cl3 = c.lo + cl2;
  return fast_two_sum(c.hi, cl3);
}

// ---------------------------------------------------------------------------
// Compensated summation.
// ---------------------------------------------------------------------------

/// Kahan accumulator; the represented value is sum + compensation.
struct KahanAccumulator {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double term) noexcept {
    const double y = term + compensation;
    const double t = sum + y;
    compensation = y - (t - sum);
    sum = t;
  }

  double value() const noexcept { return sum + compensation; }
};

inline KahanAccumulator kahan_add(KahanAccumulator acc, double term) noexcept {
  acc.add(term);
  return acc;
}

// ---------------------------------------------------------------------------
// Accumulation policies. The first letter names the precision of the product
// variable, the second that of the per-worker partial sum.
// ---------------------------------------------------------------------------

enum class Policy {
  DD,    ///< double product, double partial
  Kahan, ///< double product, Kahan-compensated partial
  DQ,    ///< double product, double-double partial
  QQ,    ///< double-double row sums, product and partial
};

std::string_view to_string(Policy p);
/// Accepts "dd", "kahan", "dq", "qq" (case-insensitive). Throws std::invalid_argument.
Policy parse_policy(std::string_view name);

// ---------------------------------------------------------------------------
// Exact accumulation.
// ---------------------------------------------------------------------------

/// 256-bit binary floating point used for reference values.
using Extended =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>,
                                  boost::multiprecision::et_off>;

/// Exact sum of finite doubles. Every finite double is an integer multiple of
/// 2^-1074, so the state is one big integer in those units and addition is
/// associative and commutative.
class ExactSum {
public:
  ExactSum() = default;

  void add(double v);
  void add(const DoubleDouble& v) {
    add(v.hi);
    add(v.lo);
  }
  void add(const ExactSum& other) { units_ += other.units_; }

  void negate() { units_ = -units_; }
  void scale_pow2(int k); ///< multiply by 2^k, k >= 0

  bool is_zero() const { return units_.is_zero(); }

  /// Correctly rounded (nearest, ties to even).
  double to_double() const;
  /// hi = to_double(), lo = correctly rounded remainder.
  DoubleDouble to_dd() const;
  Extended to_extended() const;

  /// Nonoverlapping doubles of decreasing magnitude summing exactly to the
  /// value; the first one equals to_double(). Empty for zero.
  std::vector<double> components() const;
  static ExactSum from_components(std::span<const double> parts);

  bool operator==(const ExactSum&) const = default;

private:
  BigInt units_;
};

// ---------------------------------------------------------------------------
// Error measurement against known permanents.
// ---------------------------------------------------------------------------

struct ErrorMeasure {
  double value = 0.0;
  /// Set when the exact value is zero and value holds the absolute error.
  bool absolute = false;
};

ErrorMeasure relative_error(const DoubleDouble& computed, const Extended& exact);
ErrorMeasure relative_error(double computed, const Extended& exact);
ErrorMeasure relative_error(const Complex& computed, const Complex& exact);
ErrorMeasure relative_error(const BigInt& computed, const BigInt& exact);

/// n! * a^n for the binary64 value a, evaluated in 256-bit precision.
Extended reference_permanent(int n, double a);

Extended to_extended(const DoubleDouble& v);

} // namespace permanent

#pragma once

#include <cmath>
#include <complex>
#include <concepts>
#include <string>
#include <string_view>
#include <variant>

#include <boost/multiprecision/cpp_int.hpp>

namespace permanent {

using Complex = std::complex<double>;
using BigInt = boost::multiprecision::cpp_int;

enum class ScalarKind { real64, complex128, integer };

/// The three entry types a matrix may hold.
template <class T>
concept MatrixScalar =
    std::same_as<T, double> || std::same_as<T, Complex> || std::same_as<T, BigInt>;

template <MatrixScalar T>
constexpr ScalarKind kind_of() {
  if constexpr (std::same_as<T, double>) {
    return ScalarKind::real64;
  } else if constexpr (std::same_as<T, Complex>) {
    return ScalarKind::complex128;
  } else {
    return ScalarKind::integer;
  }
}

std::string_view to_string(ScalarKind kind);

/// A single tagged scalar value.
using Scalar = std::variant<double, Complex, BigInt>;

ScalarKind kind_of(const Scalar& s);

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }
inline bool is_finite(const BigInt&) { return true; }

inline bool is_zero(double v) { return v == 0.0; }
inline bool is_zero(const Complex& v) { return v == Complex{}; }
inline bool is_zero(const BigInt& v) { return v.is_zero(); }

/// Magnitude used for zero-tolerance tests.
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
inline double magnitude(const BigInt& v) { return std::abs(v.convert_to<double>()); }

} // namespace permanent

#include "permanent/precision.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>
#include <string>

#include "permanent/errors.hpp"

namespace permanent {

namespace mp = boost::multiprecision;

std::string_view to_string(Policy p) {
  switch (p) {
  case Policy::DD:
    return "dd";
  case Policy::Kahan:
    return "kahan";
  case Policy::DQ:
    return "dq";
  case Policy::QQ:
    return "qq";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dd") return Policy::DD;
  if (lower == "kahan") return Policy::Kahan;
  if (lower == "dq") return Policy::DQ;
  if (lower == "qq") return Policy::QQ;
  throw std::invalid_argument("unknown precision policy '" + std::string(name) + "'");
}

namespace {

constexpr int kUnitExponent = -1074; // value = units * 2^kUnitExponent

// Exact value of units * 2^kUnitExponent rounded to nearest-even double.
double round_units(const BigInt& units) {
  if (units.is_zero()) {
    return 0.0;
  }
  const bool negative = units.sign() < 0;
  const BigInt mag = negative ? BigInt(-units) : units;
  const auto top = static_cast<long>(mp::msb(mag));
  double result;
  if (top < 53) {
    // Fits the significand exactly; the scaled value is at most subnormal-fine.
    result = std::ldexp(mag.convert_to<double>(), kUnitExponent);
  } else {
    const long shift = top - 52;
    BigInt kept = mag >> shift;
    const BigInt rest = mag - (kept << shift);
    const BigInt half = BigInt(1) << (shift - 1);
    if (rest > half || (rest == half && mp::bit_test(kept, 0))) {
      ++kept;
    }
    const long exponent = shift + kUnitExponent;
    if (exponent + static_cast<long>(mp::msb(kept)) > std::numeric_limits<double>::max_exponent - 1) {
      result = std::numeric_limits<double>::infinity();
    } else {
      result = std::ldexp(kept.convert_to<double>(), static_cast<int>(exponent));
    }
  }
  return negative ? -result : result;
}

BigInt units_of(double v) {
  if (v == 0.0) {
    return BigInt(0);
  }
  int e = 0;
  const double m = std::frexp(v, &e); // v = m * 2^e, 0.5 <= |m| < 1
  const auto mantissa = static_cast<long long>(std::ldexp(m, 53));
  BigInt units(mantissa);
  const int offset = e - 53 - kUnitExponent;
  if (offset >= 0) {
    units <<= offset;
  } else {
    // Subnormal input: the dropped bits are zero.
    units /= BigInt(1) << (-offset);
  }
  return units;
}

} // namespace

void ExactSum::add(double v) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument("ExactSum accepts finite values only");
  }
  if (v != 0.0) {
    units_ += units_of(v);
  }
}

void ExactSum::scale_pow2(int k) {
  if (k < 0) {
    throw std::invalid_argument("scale_pow2 needs k >= 0");
  }
  units_ <<= k;
}

double ExactSum::to_double() const { return round_units(units_); }

DoubleDouble ExactSum::to_dd() const {
  const double hi = round_units(units_);
  if (!std::isfinite(hi)) {
    return {hi, 0.0};
  }
  return {hi, round_units(units_ - units_of(hi))};
}

Extended ExactSum::to_extended() const { return mp::ldexp(Extended(units_), kUnitExponent); }

std::vector<double> ExactSum::components() const {
  std::vector<double> parts;
  BigInt rest = units_;
  while (!rest.is_zero()) {
    const double c = round_units(rest);
    if (!std::isfinite(c)) {
      throw std::overflow_error("exact sum exceeds the double range");
    }
    parts.push_back(c);
    rest -= units_of(c);
  }
  return parts;
}

ExactSum ExactSum::from_components(std::span<const double> parts) {
  ExactSum s;
  for (double p : parts) {
    s.add(p);
  }
  return s;
}

Extended to_extended(const DoubleDouble& v) { return Extended(v.hi) + Extended(v.lo); }

ErrorMeasure relative_error(const DoubleDouble& computed, const Extended& exact) {
  const Extended diff = mp::abs(to_extended(computed) - exact);
  if (exact == 0) {
    return {diff.convert_to<double>(), true};
  }
  return {(diff / mp::abs(exact)).convert_to<double>(), false};
}

ErrorMeasure relative_error(double computed, const Extended& exact) {
  return relative_error(DoubleDouble{computed}, exact);
}

ErrorMeasure relative_error(const Complex& computed, const Complex& exact) {
  const Extended dr = Extended(computed.real()) - Extended(exact.real());
  const Extended di = Extended(computed.imag()) - Extended(exact.imag());
  const Extended diff = mp::sqrt(dr * dr + di * di);
  const Extended er = exact.real();
  const Extended ei = exact.imag();
  const Extended modulus = mp::sqrt(er * er + ei * ei);
  if (modulus == 0) {
    return {diff.convert_to<double>(), true};
  }
  return {(diff / modulus).convert_to<double>(), false};
}

ErrorMeasure relative_error(const BigInt& computed, const BigInt& exact) {
  const Extended diff = Extended(mp::abs(BigInt(computed - exact)));
  if (exact.is_zero()) {
    return {diff.convert_to<double>(), true};
  }
  return {(diff / Extended(mp::abs(exact))).convert_to<double>(), false};
}

Extended reference_permanent(int n, double a) {
  if (n < 1 || n > 63) {
    throw DomainError("reference_permanent needs 1 <= n <= 63");
  }
  if (!std::isfinite(a)) {
    throw std::invalid_argument("reference value must be finite");
  }
  BigInt factorial = 1;
  for (int k = 2; k <= n; ++k) {
    factorial *= k;
  }
  return Extended(factorial) * mp::pow(Extended(a), n);
}

} // namespace permanent

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "permanent/precision.hpp"

using namespace permanent;

namespace {

Extended ext(const DoubleDouble& v) { return Extended(v.hi) + Extended(v.lo); }

double rel(const Extended& got, const Extended& ref) { return static_cast<double>(abs((got - ref) / ref)); }

} // namespace

TEST_CASE("two_sum and two_prod are exact on random operands") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-200, 200);
  for (int t = 0; t < 20000; ++t) {
    const double a = std::ldexp(u(rng), e(rng));
    const double b = std::ldexp(u(rng), e(rng));
    const auto s = two_sum(a, b);
    REQUIRE(ext(s) == Extended(a) + Extended(b));
    REQUIRE(s.hi == a + b);
    const auto p = two_prod(a, b);
    REQUIRE(ext(p) == Extended(a) * Extended(b));
  }
}

TEST_CASE("fast_two_sum is exact when |a| >= |b|") {
  const auto s = fast_two_sum(1.0, std::ldexp(1.0, -60));
  CHECK(s.hi == 1.0);
  CHECK(s.lo == std::ldexp(1.0, -60));
}

TEST_CASE("double-double operations stay within 2^-104 relative") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const double bound = std::ldexp(1.0, -104);
  for (int t = 0; t < 20000; ++t) {
    const DoubleDouble x = fast_two_sum(u(rng), u(rng) * 1e-17);
    const DoubleDouble y = fast_two_sum(u(rng), u(rng) * 1e-17);
    REQUIRE(rel(ext(dd_mul(x, y)), ext(x) * ext(y)) <= bound);
    REQUIRE(rel(ext(dd_add(x, y)), ext(x) + ext(y)) <= bound);
    REQUIRE(rel(ext(dd_mul(x, y.hi)), ext(x) * Extended(y.hi)) <= bound);
  }
}

TEST_CASE("Kahan recovers what naive summation loses") {
  KahanAccumulator k;
  double naive = 0;
  for (int i = 0; i < 1000000; ++i) {
    k.add(0.1);
    naive += 0.1;
  }
  const Extended ref = Extended(0.1) * 1000000;
  CHECK(rel(Extended(k.value()), ref) < rel(Extended(naive), ref));
  CHECK(rel(Extended(k.value()), ref) < 1e-15);
  CHECK(kahan_add(KahanAccumulator{}, 2.0).value() == 2.0);
}

TEST_CASE("policy names round trip") {
  for (Policy p : {Policy::DD, Policy::Kahan, Policy::DQ, Policy::QQ}) {
    CHECK(parse_policy(to_string(p)) == p);
  }
  CHECK(parse_policy("QQ") == Policy::QQ);
  CHECK_THROWS_AS(parse_policy("fp128"), std::invalid_argument);
}

TEST_CASE("ExactSum is associative and rounds correctly") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-80, 80);
  std::vector<double> v(500);
  for (auto& x : v) {
    x = std::ldexp(u(rng), e(rng));
  }
  ExactSum forward, backward;
  Extended ref = 0;
  for (double x : v) {
    forward.add(x);
    ref += Extended(x);
  }
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    backward.add(*it);
  }
  CHECK(forward == backward);
  CHECK(forward.to_extended() == ref);
  CHECK(forward.to_double() == static_cast<double>(ref));
  const auto parts = forward.components();
  CHECK(ExactSum::from_components(parts) == forward);
  CHECK(parts.front() == forward.to_double());
}

TEST_CASE("ExactSum handles cancellation, subnormals, negation and scaling") {
  ExactSum s;
  s.add(1e300);
  s.add(std::numeric_limits<double>::denorm_min());
  s.add(-1e300);
  CHECK(s.to_double() == std::numeric_limits<double>::denorm_min());
  s.negate();
  CHECK(s.to_double() == -std::numeric_limits<double>::denorm_min());
  ExactSum t;
  t.add(3.0);
  t.scale_pow2(4);
  CHECK(t.to_double() == 48.0);
  CHECK(ExactSum{}.is_zero());
  CHECK(ExactSum{}.components().empty());
  ExactSum tie;
  tie.add(1.0);
  tie.add(std::ldexp(1.0, -53)); // exactly halfway: rounds to even
  CHECK(tie.to_double() == 1.0);
  CHECK(tie.to_dd().lo == std::ldexp(1.0, -53));
}

TEST_CASE("reference permanent and error measures") {
  CHECK(reference_permanent(12, 1.0) == Extended(479001600));
  CHECK(reference_permanent(3, 2.0) == Extended(48));
  CHECK(relative_error(DoubleDouble(479001600.0), reference_permanent(12, 1.0)).value == 0.0);
  const auto zero = relative_error(0.25, Extended(0));
  CHECK(zero.absolute);
  CHECK(zero.value == 0.25);
  CHECK(relative_error(BigInt(9), BigInt(10)).value == doctest::Approx(0.1));
}

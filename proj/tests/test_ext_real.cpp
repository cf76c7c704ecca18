#include "doctest.h"

#include <cmath>
#include <random>

#include "hypdamp/ext_real.hpp"

using hypdamp::ExtReal;

TEST_CASE("ext_real round trips doubles exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1e300, 1e300);
  for (int i = 0; i < 2000; ++i) {
    double x = uni(rng);
    CHECK(ExtReal(x).to_double() == x);
  }
  CHECK(ExtReal(0.0).to_double() == 0.0);
  CHECK(ExtReal(0.0).is_zero());
}

TEST_CASE("ext_real arithmetic agrees with long double in range") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1e8, 1e8);
  for (int i = 0; i < 5000; ++i) {
    double a = uni(rng), b = uni(rng);
    ExtReal ea(a), eb(b);
    CHECK((ea + eb).to_double() == doctest::Approx(a + b).epsilon(1e-14));
    CHECK((ea - eb).to_double() == doctest::Approx(a - b).epsilon(1e-14));
    CHECK((ea * eb).to_double() == doctest::Approx(a * b).epsilon(1e-14));
    if (b != 0) CHECK((ea / eb).to_double() == doctest::Approx(a / b).epsilon(1e-14));
    CHECK((ea < eb) == (a < b));
    CHECK((ea == eb) == (a == b));
  }
}

TEST_CASE("ext_real survives magnitudes far beyond double range") {
  // x = exp(1e12): binary exponent ~1.44e12.
  ExtReal x = ExtReal::exp_of(1e12);
  CHECK(x.log_abs() == doctest::Approx(1e12).epsilon(1e-13));
  ExtReal y = x * x;
  CHECK(y.log_abs() == doctest::Approx(2e12).epsilon(1e-13));
  CHECK(y > x);
  CHECK((y / x).log_abs() == doctest::Approx(1e12).epsilon(1e-12));
  // Dominant-term absorption: adding something 2^60+ smaller is a no-op.
  ExtReal z = y + ExtReal(1.0);
  CHECK(z == y);
  // Subtraction of equal values is exactly zero even at huge scale.
  CHECK((y - y).is_zero());
  CHECK(x.to_double() == std::numeric_limits<double>::infinity());
  ExtReal tiny = ExtReal::exp_of(-1e12);
  CHECK(tiny.to_double() == 0.0);
  CHECK(tiny.sign() == 1);
  CHECK(tiny < ExtReal(1e-300));
}

TEST_CASE("exp_of matches std::exp inside double range") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-700.0, 700.0);
  for (int i = 0; i < 5000; ++i) {
    double l = uni(rng);
    CHECK(ExtReal::exp_of(l).to_double() == doctest::Approx(std::exp(l)).epsilon(1e-14));
  }
  // Precision of the ln2 splitting at large arguments: relative error of
  // the mantissa should stay near 1e-15 even when |log| ~ 1e9.
  double big = 987654321.123;
  CHECK(ExtReal::exp_of(big).log_abs() == doctest::Approx(big).epsilon(1e-15));
}

TEST_CASE("ordering is total and sign-aware") {
  ExtReal neg_huge = -ExtReal::exp_of(1e10);
  ExtReal neg_one(-1.0);
  ExtReal zero(0.0);
  ExtReal pos_tiny = ExtReal::exp_of(-1e10);
  ExtReal pos_one(1.0);
  CHECK(neg_huge < neg_one);
  CHECK(neg_one < zero);
  CHECK(zero < pos_tiny);
  CHECK(pos_tiny < pos_one);
  CHECK(max(neg_huge, pos_tiny) == pos_tiny);
  CHECK(min(neg_one, pos_one) == neg_one);
  CHECK(abs(neg_huge) > pos_one);
}

TEST_CASE("to_string renders extreme exponents") {
  CHECK(ExtReal(1.5).to_string() == "1.5");
  CHECK(ExtReal(0.0).to_string() == "0");
  std::string s = ExtReal::exp_of(1e6).to_string();
  CHECK(s.find("e+434294") != std::string::npos);  // 1e6 / ln(10) = 434294.48...
  std::string neg = (-ExtReal::exp_of(1e6)).to_string();
  CHECK(neg.front() == '-');
}

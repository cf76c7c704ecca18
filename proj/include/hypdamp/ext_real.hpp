#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>

namespace hypdamp {

// Floating-point scalar with a 64-bit binary exponent.
//
// The resonant-coefficient constructions in this project produce quantities
// like exp(eps_k * lambda_k * s_k) whose *logarithms* already overflow IEEE
// double (log-energies around 1e4e6 for eight certified modes).  ExtReal
// keeps a double mantissa, so it carries the usual ~16 significant digits,
// but its magnitude range is 2^(+-2^62).
//
// value = mant * 2^exp2, with mant in +-[0.5, 1) or exactly 0.
class ExtReal {
 public:
  constexpr ExtReal() = default;
  ExtReal(double x) { *this = normalized(x, 0); }  // NOLINT: implicit by design

  static ExtReal normalized(double m, std::int64_t e) {
    ExtReal r;
    if (m == 0.0 || !std::isfinite(m)) {
      r.mant_ = m;  // 0, inf and nan keep exponent 0
      r.exp2_ = 0;
      return r;
    }
    int k = 0;
    r.mant_ = std::frexp(m, &k);
    r.exp2_ = e + k;
    return r;
  }

  // exp(x) for a natural-log argument far outside double range.
  static ExtReal exp_of(double log_value) {
    if (std::isnan(log_value)) return ExtReal(std::nan(""));
    if (log_value == -std::numeric_limits<double>::infinity()) return ExtReal(0.0);
    if (log_value == std::numeric_limits<double>::infinity())
      return ExtReal(std::numeric_limits<double>::infinity());
    double e = std::floor(log_value / kLn2);
    // Split ln2 so that log_value - e*ln2 keeps full precision even when
    // e is ~1e9 and the naive product would eat 8 digits.
    double r = std::fma(-e, kLn2Hi, log_value);
    r = std::fma(-e, kLn2Lo, r);
    // r is ~[0, ln2); clamp stragglers from the floor rounding.
    if (r < 0) { r += kLn2; e -= 1.0; }
    if (r >= kLn2) { r -= kLn2; e += 1.0; }
    return normalized(std::exp(r), static_cast<std::int64_t>(e));
  }

  double mantissa() const { return mant_; }
  std::int64_t exp2() const { return exp2_; }
  bool is_zero() const { return mant_ == 0.0; }
  bool is_finite() const { return std::isfinite(mant_); }
  int sign() const { return mant_ > 0 ? 1 : (mant_ < 0 ? -1 : 0); }

  double to_double() const {
    if (mant_ == 0.0 || !std::isfinite(mant_)) return mant_;
    if (exp2_ > 1100) return mant_ > 0 ? std::numeric_limits<double>::infinity()
                                       : -std::numeric_limits<double>::infinity();
    if (exp2_ < -1100) return mant_ > 0 ? 0.0 : -0.0;
    return std::ldexp(mant_, static_cast<int>(exp2_));
  }

  // Natural log of |x|; -inf for zero.
  double log_abs() const {
    if (mant_ == 0.0) return -std::numeric_limits<double>::infinity();
    double e = static_cast<double>(exp2_);
    return std::fma(e, kLn2Lo, std::log(std::fabs(mant_))) + e * kLn2Hi;
  }

  ExtReal operator-() const {
    ExtReal r = *this;
    r.mant_ = -r.mant_;
    return r;
  }

  friend ExtReal operator*(const ExtReal& a, const ExtReal& b) {
    if (a.is_zero() || b.is_zero()) return ExtReal(a.mant_ * b.mant_);
    return normalized(a.mant_ * b.mant_, a.exp2_ + b.exp2_);
  }
  friend ExtReal operator/(const ExtReal& a, const ExtReal& b) {
    if (a.is_zero() || b.is_zero()) return ExtReal(a.mant_ / b.mant_);
    return normalized(a.mant_ / b.mant_, a.exp2_ - b.exp2_);
  }

  friend ExtReal operator+(const ExtReal& a, const ExtReal& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (!a.is_finite() || !b.is_finite()) return ExtReal(a.mant_ + b.mant_);
    // Past ~60 bits the smaller addend is below one ulp of the larger.
    if (a.exp2_ - b.exp2_ > 60) return a;
    if (b.exp2_ - a.exp2_ > 60) return b;
    double shifted = std::ldexp(b.mant_, static_cast<int>(b.exp2_ - a.exp2_));
    return normalized(a.mant_ + shifted, a.exp2_);
  }
  friend ExtReal operator-(const ExtReal& a, const ExtReal& b) { return a + (-b); }

  ExtReal& operator+=(const ExtReal& o) { return *this = *this + o; }
  ExtReal& operator-=(const ExtReal& o) { return *this = *this - o; }
  ExtReal& operator*=(const ExtReal& o) { return *this = *this * o; }
  ExtReal& operator/=(const ExtReal& o) { return *this = *this / o; }

  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    return a.mant_ == b.mant_ && (a.is_zero() || a.exp2_ == b.exp2_);
  }
  friend bool operator<(const ExtReal& a, const ExtReal& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb;
    if (sa == 0) return false;
    bool mag_less;
    if (a.exp2_ != b.exp2_)
      mag_less = a.exp2_ < b.exp2_;
    else
      mag_less = std::fabs(a.mant_) < std::fabs(b.mant_);
    if (a.exp2_ == b.exp2_ && a.mant_ == b.mant_) return false;
    return sa > 0 ? mag_less : !mag_less && !(a == b);
  }
  friend bool operator>(const ExtReal& a, const ExtReal& b) { return b < a; }
  friend bool operator<=(const ExtReal& a, const ExtReal& b) { return !(b < a); }
  friend bool operator>=(const ExtReal& a, const ExtReal& b) { return !(a < b); }

  friend ExtReal abs(const ExtReal& a) {
    ExtReal r = a;
    r.mant_ = std::fabs(r.mant_);
    return r;
  }
  friend ExtReal min(const ExtReal& a, const ExtReal& b) { return a < b ? a : b; }
  friend ExtReal max(const ExtReal& a, const ExtReal& b) { return a < b ? b : a; }

  // Decimal scientific string, e.g. "-3.141592653589793e+838441".
  // Mantissa digits degrade to ~10 for binary exponents beyond 1e9.
  std::string to_string() const {
    if (mant_ == 0.0) return "0";
    if (!std::isfinite(mant_)) return mant_ > 0 ? "inf" : (mant_ < 0 ? "-inf" : "nan");
    if (exp2_ > -1000 && exp2_ < 1000) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", to_double());
      return buf;
    }
    long double l10 = static_cast<long double>(exp2_) * kLog10_2L +
                      std::log10(std::fabs(static_cast<long double>(mant_)));
    long double d = std::floor(l10);
    double m10 = static_cast<double>(std::pow(10.0L, l10 - d));
    if (m10 >= 10.0) { m10 /= 10.0; d += 1.0L; }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%.12ge%+lld", mant_ < 0 ? "-" : "", m10,
                  static_cast<long long>(d));
    return buf;
  }

 private:
  static constexpr double kLn2 = 0.6931471805599453;
  static constexpr double kLn2Hi = 0.693147180369123816490;  // 21 high bits exact
  static constexpr double kLn2Lo = 1.90821492927058770002e-10;
  static constexpr long double kLog10_2L = 0.30102999566398119521L;

  double mant_ = 0.0;
  std::int64_t exp2_ = 0;
};

}  // namespace hypdamp

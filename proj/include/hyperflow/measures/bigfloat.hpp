#pragma once

#include <mpfr.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <utility>

#include "hyperflow/error.hpp"
#include "hyperflow/probcore/rational.hpp"

namespace hyperflow::measures {

constexpr long kDefaultPrecisionBits = 128;
constexpr long kMinPrecisionBits = 64;

/// HYPERFLOW_PRECISION_BITS, or 128 when unset.
inline long precision_from_env() {
  const char* s = std::getenv("HYPERFLOW_PRECISION_BITS");
  if (!s || !*s) return kDefaultPrecisionBits;
  char* end = nullptr;
  const long bits = std::strtol(s, &end, 10);
  if (*end != '\0' || bits < kMinPrecisionBits || bits > 1 << 20)
    throw Error(Errc::InvalidArgument, "HYPERFLOW_PRECISION_BITS must be an integer >= 64");
  return bits;
}

/// Arbitrary-precision binary float (MPFR).
class BigFloat {
 public:
  explicit BigFloat(long precision = kDefaultPrecisionBits) {
    mpfr_init2(x_, precision);
    mpfr_set_zero(x_, 1);
  }
  BigFloat(const BigFloat& o) {
    mpfr_init2(x_, mpfr_get_prec(o.x_));
    mpfr_set(x_, o.x_, MPFR_RNDN);
  }
  BigFloat(BigFloat&& o) noexcept : BigFloat(mpfr_get_prec(o.x_)) { mpfr_swap(x_, o.x_); }
  BigFloat& operator=(BigFloat o) noexcept {
    mpfr_swap(x_, o.x_);
    return *this;
  }
  ~BigFloat() { mpfr_clear(x_); }

  static BigFloat from_rational(const Rational& r, long precision, mpfr_rnd_t rnd) {
    BigFloat out(precision);
    mpfr_set_q(out.x_, r.backend().data(), rnd);
    return out;
  }

  long precision() const { return mpfr_get_prec(x_); }
  mpfr_ptr get() { return x_; }
  mpfr_srcptr get() const { return x_; }
  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

  /// Fixed-point decimal text with `digits` fractional digits.
  std::string to_string(int digits = 12) const {
    char* buf = nullptr;
    mpfr_asprintf(&buf, "%.*Rf", digits, x_);
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
  }

  friend bool operator<(const BigFloat& a, const BigFloat& b) { return mpfr_less_p(a.x_, b.x_); }
  friend bool operator<=(const BigFloat& a, const BigFloat& b) { return mpfr_lessequal_p(a.x_, b.x_); }

 private:
  mpfr_t x_;
};

/// Closed interval [lo, hi] with outward rounding.
class Interval {
 public:
  explicit Interval(long precision = kDefaultPrecisionBits) : lo_(precision), hi_(precision) {}

  static Interval exact(const Rational& r, long precision) {
    Interval out(precision);
    out.lo_ = BigFloat::from_rational(r, precision, MPFR_RNDD);
    out.hi_ = BigFloat::from_rational(r, precision, MPFR_RNDU);
    return out;
  }

  /// Encloses lg(r) for r > 0.
  static Interval lg(const Rational& r, long precision) {
    if (r <= 0) throw Error(Errc::InvalidArgument, "logarithm of a non-positive number");
    Interval q = exact(r, precision);
    Interval out(precision);
    mpfr_log2(out.lo_.get(), q.lo_.get(), MPFR_RNDD);
    mpfr_log2(out.hi_.get(), q.hi_.get(), MPFR_RNDU);
    return out;
  }

  const BigFloat& lo() const { return lo_; }
  const BigFloat& hi() const { return hi_; }
  long precision() const { return lo_.precision(); }

  BigFloat mid() const {
    BigFloat m(precision());
    mpfr_add(m.get(), lo_.get(), hi_.get(), MPFR_RNDN);
    mpfr_div_2ui(m.get(), m.get(), 1, MPFR_RNDN);
    return m;
  }

  BigFloat width() const {
    BigFloat w(precision());
    mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
    return w;
  }

  friend Interval operator+(const Interval& a, const Interval& b) {
    Interval out(a.precision());
    mpfr_add(out.lo_.get(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
    mpfr_add(out.hi_.get(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
    return out;
  }

  friend Interval operator-(const Interval& a, const Interval& b) {
    Interval out(a.precision());
    mpfr_sub(out.lo_.get(), a.lo_.get(), b.hi_.get(), MPFR_RNDD);
    mpfr_sub(out.hi_.get(), a.hi_.get(), b.lo_.get(), MPFR_RNDU);
    return out;
  }

  friend Interval operator*(const Interval& a, const Interval& b) {
    const long prec = a.precision();
    Interval out(prec);
    BigFloat t(prec);
    bool first = true;
    for (const BigFloat* x : {&a.lo_, &a.hi_})
      for (const BigFloat* y : {&b.lo_, &b.hi_}) {
        mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDD);
        if (first || t < out.lo_) out.lo_ = t;
        mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDU);
        if (first || out.hi_ < t) out.hi_ = t;
        first = false;
      }
    return out;
  }

  bool contains_zero() const { return mpfr_sgn(lo_.get()) <= 0 && mpfr_sgn(hi_.get()) >= 0; }

  /// True when every point lies within tol of zero.
  bool within(double tol) const {
    return std::abs(lo_.to_double()) <= tol && std::abs(hi_.to_double()) <= tol;
  }

  int sign() const {
    if (mpfr_sgn(lo_.get()) > 0) return 1;
    if (mpfr_sgn(hi_.get()) < 0) return -1;
    return 0;
  }

 private:
  BigFloat lo_, hi_;
};

}  // namespace hyperflow::measures

// Exact dyadic rationals mantissa * 2^exponent, the coordinate type for ball
// arithmetic. Construction and ring operations are exact; rounding is explicit
// and always reports an error bound.

#pragma once

#include <gmpxx.h>

#include <string>

namespace ctheta {

// Precision in bits. A target precision N means absolute error <= 2^-N; a
// working precision w means midpoints are rounded to w significant bits.
using Precision = long;

struct Rounded;

class Dyadic {
  public:
    Dyadic() : mant_(0), exp_(0) {}
    Dyadic(long value) : mant_(value), exp_(0) { normalize(); }
    Dyadic(const mpz_class& mantissa, long exponent) : mant_(mantissa), exp_(exponent) {
        normalize();
    }

    static Dyadic pow2(long k) { return Dyadic(1, k); }

    const mpz_class& mantissa() const { return mant_; }
    long exponent() const { return exp_; }

    bool is_zero() const { return mant_ == 0; }
    int sign() const { return sgn(mant_); }

    // Number of bits of |mantissa| (0 for zero).
    long mant_bits() const { return is_zero() ? 0 : (long)mpz_sizeinbase(mant_.get_mpz_t(), 2); }

    // Smallest e with |x| < 2^e; only valid for nonzero values.
    long mag_exp() const { return mant_bits() + exp_; }

    Dyadic operator-() const { return Dyadic(-mant_, exp_, NoNormalize{}); }
    Dyadic abs() const { return Dyadic(::abs(mant_), exp_, NoNormalize{}); }
    Dyadic mul_pow2(long k) const { return Dyadic(mant_, exp_ + k, NoNormalize{}); }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);

    // Three-way comparison of values; cheap even when exponents are far apart.
    static int cmp(const Dyadic& a, const Dyadic& b);

    friend bool operator==(const Dyadic& a, const Dyadic& b) {
        return a.mant_ == b.mant_ && (a.exp_ == b.exp_ || a.mant_ == 0);
    }
    friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
    friend bool operator<(const Dyadic& a, const Dyadic& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Dyadic& a, const Dyadic& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) >= 0; }

    // Round to `bits` significant bits (round to nearest, ties away from
    // zero). Returns the rounded value and a power-of-2 bound on |exact -
    // rounded| (zero when exact).
    Rounded round_to_bits(Precision bits) const;

    // Round to the absolute grid 2^-bits * Z, to nearest.
    Dyadic round_abs(Precision bits) const;

    // Directed shortening to `bits` significant bits. shorten_up never
    // decreases the value, shorten_down never increases it.
    Dyadic shorten_up(Precision bits) const;
    Dyadic shorten_down(Precision bits) const;

    // Nearest integer (ties toward +infinity).
    mpz_class round_nearest_int() const;

    double to_double() const;

    // Serialization as "0x<hex mantissa>p<decimal exponent>", bit exact.
    std::string to_hex() const;
    static Dyadic parse_hex(const std::string& s);

    // Approximate decimal rendering for human display.
    std::string to_decimal(size_t digits) const;

  private:
    struct NoNormalize {};
    Dyadic(const mpz_class& mantissa, long exponent, NoNormalize)
        : mant_(mantissa), exp_(exponent) {}
    Dyadic(mpz_class&& mantissa, long exponent, NoNormalize)
        : mant_(std::move(mantissa)), exp_(exponent) {}

    // Canonical form: mantissa odd or zero (zero has exponent 0).
    void normalize();

    mpz_class mant_;
    long exp_;
};

// Result of rounding a dyadic: the rounded value plus a bound on the
// displacement.
struct Rounded {
    Dyadic value;
    Dyadic error;
};

// Directed-rounding helpers for error-radius bookkeeping. All results are
// shortened to a small fixed number of significant bits so radius arithmetic
// stays O(1) regardless of working precision. The *_up forms never
// underestimate, the *_down forms never overestimate. Arguments must be >= 0
// unless noted.
namespace rnd {

inline constexpr Precision kRadiusBits = 32;

Dyadic add_up(const Dyadic& a, const Dyadic& b);
Dyadic add_down(const Dyadic& a, const Dyadic& b);
Dyadic mul_up(const Dyadic& a, const Dyadic& b);
Dyadic mul_down(const Dyadic& a, const Dyadic& b);
Dyadic div_up(const Dyadic& a, const Dyadic& b);   // b > 0
Dyadic div_down(const Dyadic& a, const Dyadic& b); // b > 0
// max(a - b, 0), rounded down.
Dyadic sub_down(const Dyadic& a, const Dyadic& b);
Dyadic sqrt_up(const Dyadic& a);
Dyadic sqrt_down(const Dyadic& a);
// sqrt(a^2 + b^2) rounded up/down; accepts arguments of any sign.
Dyadic hypot_up(const Dyadic& a, const Dyadic& b);
Dyadic hypot_down(const Dyadic& a, const Dyadic& b);

// Transcendental bounds (MPFR directed rounding at kRadiusBits); argument of
// any sign.
Dyadic exp_up(const Dyadic& x);
Dyadic exp_down(const Dyadic& x);
Dyadic expm1_up(const Dyadic& x);
Dyadic pi_up();
Dyadic pi_down();

}  // namespace rnd

}  // namespace ctheta

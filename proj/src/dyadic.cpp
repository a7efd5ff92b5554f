// Dyadic rational arithmetic and directed-rounding helpers.

#include "ctheta/dyadic.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cassert>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "ctheta/errors.hpp"

namespace ctheta {

void Dyadic::normalize() {
    if (mant_ == 0) {
        exp_ = 0;
        return;
    }
    mp_bitcnt_t tz = mpz_scan1(mant_.get_mpz_t(), 0);
    if (tz > 0) {
        // Removing trailing zero bits is an exact division.
        mpz_tdiv_q_2exp(mant_.get_mpz_t(), mant_.get_mpz_t(), tz);
        exp_ += (long)tz;
    }
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    long e = std::min(a.exp_, b.exp_);
    mpz_class ma, mb;
    mpz_mul_2exp(ma.get_mpz_t(), a.mant_.get_mpz_t(), (mp_bitcnt_t)(a.exp_ - e));
    mpz_mul_2exp(mb.get_mpz_t(), b.mant_.get_mpz_t(), (mp_bitcnt_t)(b.exp_ - e));
    return Dyadic(ma + mb, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero() || b.is_zero()) return Dyadic();
    // Product of odd mantissas is odd, no renormalization needed.
    return Dyadic(a.mant_ * b.mant_, a.exp_ + b.exp_, Dyadic::NoNormalize{});
}

int Dyadic::cmp(const Dyadic& a, const Dyadic& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa < sb ? -1 : 1;
    if (sa == 0) return 0;
    long ma = a.mag_exp(), mb = b.mag_exp();
    if (ma != mb) {
        // Magnitude ranges [2^(m-1), 2^m) are disjoint.
        int by_mag = ma < mb ? -1 : 1;
        return sa > 0 ? by_mag : -by_mag;
    }
    // Equal magnitude exponent: the alignment shift equals the difference of
    // mantissa bit lengths, so it stays bounded by the operand sizes.
    long e = std::min(a.exp_, b.exp_);
    mpz_class x, y;
    mpz_mul_2exp(x.get_mpz_t(), a.mant_.get_mpz_t(), (mp_bitcnt_t)(a.exp_ - e));
    mpz_mul_2exp(y.get_mpz_t(), b.mant_.get_mpz_t(), (mp_bitcnt_t)(b.exp_ - e));
    return ::cmp(x, y);
}

Rounded Dyadic::round_to_bits(Precision bits) const {
    assert(bits >= 1);
    Rounded out;
    long mb = mant_bits();
    if (mb <= bits) {
        out.value = *this;
        return out;
    }
    long shift = mb - bits;
    mpz_class q, r;
    mpz_tdiv_q_2exp(q.get_mpz_t(), mant_.get_mpz_t(), (mp_bitcnt_t)shift);
    mpz_tdiv_r_2exp(r.get_mpz_t(), mant_.get_mpz_t(), (mp_bitcnt_t)shift);
    if (r != 0) {
        mpz_class half;
        mpz_setbit(half.get_mpz_t(), (mp_bitcnt_t)(shift - 1));
        // Round to nearest, ties away from zero: |exact - value| <= 2^(shift-1+e).
        if (::abs(r) >= half) q += sgn(r);
        out.error = Dyadic::pow2(exp_ + shift - 1);
    }
    out.value = Dyadic(q, exp_ + shift);
    return out;
}

Dyadic Dyadic::round_abs(Precision bits) const {
    if (is_zero() || exp_ >= -bits) return *this;
    long shift = -bits - exp_;
    // Add half an ulp then floor: round to nearest, ties toward +infinity.
    mpz_class t;
    mpz_setbit(t.get_mpz_t(), (mp_bitcnt_t)(shift - 1));
    t += mant_;
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), t.get_mpz_t(), (mp_bitcnt_t)shift);
    return Dyadic(q, -bits);
}

Dyadic Dyadic::shorten_up(Precision bits) const {
    long mb = mant_bits();
    if (mb <= bits) return *this;
    long shift = mb - bits;
    mpz_class q;
    mpz_cdiv_q_2exp(q.get_mpz_t(), mant_.get_mpz_t(), (mp_bitcnt_t)shift);
    return Dyadic(q, exp_ + shift);
}

Dyadic Dyadic::shorten_down(Precision bits) const {
    long mb = mant_bits();
    if (mb <= bits) return *this;
    long shift = mb - bits;
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), mant_.get_mpz_t(), (mp_bitcnt_t)shift);
    return Dyadic(q, exp_ + shift);
}

mpz_class Dyadic::round_nearest_int() const {
    if (exp_ >= 0) {
        mpz_class r;
        mpz_mul_2exp(r.get_mpz_t(), mant_.get_mpz_t(), (mp_bitcnt_t)exp_);
        return r;
    }
    mpz_class t;
    mpz_setbit(t.get_mpz_t(), (mp_bitcnt_t)(-exp_ - 1));
    t += mant_;
    mpz_class q;
    mpz_fdiv_q_2exp(q.get_mpz_t(), t.get_mpz_t(), (mp_bitcnt_t)(-exp_));
    return q;
}

double Dyadic::to_double() const {
    Rounded r = round_to_bits(53);
    return std::ldexp(r.value.mantissa().get_d(), (int)std::clamp(r.value.exponent(),
                                                                  (long)-4000, (long)4000));
}

std::string Dyadic::to_hex() const {
    std::string s;
    if (sign() < 0) s += '-';
    s += "0x";
    mpz_class am = ::abs(mant_);
    s += am.get_str(16);
    s += 'p';
    s += std::to_string(exp_);
    return s;
}

Dyadic Dyadic::parse_hex(const std::string& s) {
    size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
        neg = s[i] == '-';
        ++i;
    }
    if (s.size() < i + 2 || s[i] != '0' || (s[i + 1] != 'x' && s[i + 1] != 'X'))
        throw std::invalid_argument("dyadic literal must start with 0x: " + s);
    i += 2;
    size_t p = s.find_first_of("pP", i);
    if (p == std::string::npos || p == i || p + 1 >= s.size())
        throw std::invalid_argument("dyadic literal missing exponent: " + s);
    mpz_class m;
    if (mpz_set_str(m.get_mpz_t(), s.substr(i, p - i).c_str(), 16) != 0)
        throw std::invalid_argument("bad dyadic mantissa: " + s);
    errno = 0;
    char* end = nullptr;
    std::string es = s.substr(p + 1);
    long e = std::strtol(es.c_str(), &end, 10);
    if (errno != 0 || end == es.c_str() || *end != '\0')
        throw std::invalid_argument("bad dyadic exponent: " + s);
    if (neg) m = -m;
    return Dyadic(m, e);
}

std::string Dyadic::to_decimal(size_t digits) const {
    if (is_zero()) return "0";
    mpfr_t x;
    mpfr_init2(x, std::max<long>(2, mant_bits()));
    mpfr_set_z_2exp(x, mant_.get_mpz_t(), exp_, MPFR_RNDN);
    mpfr_exp_t e10 = 0;
    char* raw = mpfr_get_str(nullptr, &e10, 10, digits, x, MPFR_RNDN);
    std::string digs = raw;
    mpfr_free_str(raw);
    mpfr_clear(x);
    std::string out;
    size_t d0 = 0;
    if (!digs.empty() && digs[0] == '-') {
        out += '-';
        d0 = 1;
    }
    out += digs.substr(d0, 1);
    if (digs.size() > d0 + 1) {
        out += '.';
        out += digs.substr(d0 + 1);
    }
    out += 'e';
    out += std::to_string((long)e10 - 1);
    return out;
}

namespace rnd {

namespace {

// Exact addition would need |gap| shift bits; past this we replace the small
// operand by a same-signed power-of-2 bound instead.
constexpr long kGapLimit = 3 * kRadiusBits;

Dyadic from_mpfr(mpfr_srcptr x) {
    if (mpfr_zero_p(x)) return Dyadic();
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
    return Dyadic(m, (long)e);
}

void to_mpfr(mpfr_ptr rop, const Dyadic& x) {
    // rop must have precision >= x.mant_bits(); the assignment is then exact.
    int t = mpfr_set_z_2exp(rop, x.mantissa().get_mpz_t(), x.exponent(), MPFR_RNDN);
    (void)t;
    assert(t == 0);
}

Dyadic mpfr_unary_bound(const Dyadic& x, int (*op)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t),
                        mpfr_rnd_t dir) {
    mpfr_t in, out;
    mpfr_init2(in, std::max<long>(2, x.mant_bits()));
    mpfr_init2(out, kRadiusBits);
    to_mpfr(in, x);
    op(out, in, dir);
    if (!mpfr_number_p(out)) {
        mpfr_clears(in, out, (mpfr_ptr) nullptr);
        throw DomainError("directed transcendental bound overflowed");
    }
    Dyadic r = from_mpfr(out);
    mpfr_clears(in, out, (mpfr_ptr) nullptr);
    return r;
}

}  // namespace

Dyadic add_up(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() >= 0);
    Dyadic aa = a.shorten_up(kRadiusBits + 8);
    Dyadic bb = b.shorten_up(kRadiusBits + 8);
    if (aa.is_zero()) return bb.shorten_up(kRadiusBits);
    if (bb.is_zero()) return aa.shorten_up(kRadiusBits);
    if (aa.mag_exp() < bb.mag_exp()) std::swap(aa, bb);
    if (bb.mag_exp() < aa.mag_exp() - kGapLimit) bb = Dyadic::pow2(bb.mag_exp());
    return (aa + bb).shorten_up(kRadiusBits);
}

Dyadic add_down(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() >= 0);
    Dyadic aa = a.shorten_down(kRadiusBits + 8);
    Dyadic bb = b.shorten_down(kRadiusBits + 8);
    if (aa.is_zero()) return bb.shorten_down(kRadiusBits);
    if (bb.is_zero()) return aa.shorten_down(kRadiusBits);
    if (aa.mag_exp() < bb.mag_exp()) std::swap(aa, bb);
    if (bb.mag_exp() < aa.mag_exp() - kGapLimit) return aa.shorten_down(kRadiusBits);
    return (aa + bb).shorten_down(kRadiusBits);
}

Dyadic mul_up(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() >= 0);
    return (a.shorten_up(kRadiusBits + 8) * b.shorten_up(kRadiusBits + 8))
        .shorten_up(kRadiusBits);
}

Dyadic mul_down(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() >= 0);
    return (a.shorten_down(kRadiusBits + 8) * b.shorten_down(kRadiusBits + 8))
        .shorten_down(kRadiusBits);
}

Dyadic div_up(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() > 0);
    if (a.is_zero()) return Dyadic();
    Dyadic num = a.shorten_up(kRadiusBits + 8);
    Dyadic den = b.shorten_down(kRadiusBits + 8);
    long scale = kRadiusBits + 16;
    mpz_class n;
    mpz_mul_2exp(n.get_mpz_t(), num.mantissa().get_mpz_t(), (mp_bitcnt_t)scale);
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), den.mantissa().get_mpz_t());
    q += 1;
    return Dyadic(q, num.exponent() - scale - den.exponent()).shorten_up(kRadiusBits);
}

Dyadic div_down(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() > 0);
    if (a.is_zero()) return Dyadic();
    Dyadic num = a.shorten_down(kRadiusBits + 8);
    Dyadic den = b.shorten_up(kRadiusBits + 8);
    long scale = kRadiusBits + 16;
    mpz_class n;
    mpz_mul_2exp(n.get_mpz_t(), num.mantissa().get_mpz_t(), (mp_bitcnt_t)scale);
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), n.get_mpz_t(), den.mantissa().get_mpz_t());
    return Dyadic(q, num.exponent() - scale - den.exponent()).shorten_down(kRadiusBits);
}

Dyadic sub_down(const Dyadic& a, const Dyadic& b) {
    assert(a.sign() >= 0 && b.sign() >= 0);
    Dyadic aa = a.shorten_down(kRadiusBits + 8);
    if (b.is_zero()) return aa.shorten_down(kRadiusBits);
    Dyadic bb = b.shorten_up(kRadiusBits + 8);
    if (Dyadic::cmp(aa, bb) <= 0) return Dyadic();
    // Replace a tiny subtrahend by a power-of-2 bound so the alignment shift
    // stays small; subtracting more keeps the result a lower bound.
    if (bb.mag_exp() < aa.mag_exp() - kGapLimit) bb = Dyadic::pow2(bb.mag_exp());
    Dyadic c = aa - bb;
    if (c.sign() <= 0) return Dyadic();
    return c.shorten_down(kRadiusBits);
}

namespace {

// Floor/ceil square roots with results valid for the exact dyadic input.
Dyadic sqrt_impl(const Dyadic& in, bool up) {
    assert(in.sign() >= 0);
    Dyadic a = up ? in.shorten_up(2 * kRadiusBits + 16) : in.shorten_down(2 * kRadiusBits + 16);
    if (a.is_zero()) return Dyadic();
    long bits = a.mant_bits();
    long s = std::max<long>(0, 2 * kRadiusBits + 16 - bits);
    if ((a.exponent() - s) & 1) s += 1;
    mpz_class t;
    mpz_mul_2exp(t.get_mpz_t(), a.mantissa().get_mpz_t(), (mp_bitcnt_t)s);
    mpz_class r, rem;
    mpz_sqrtrem(r.get_mpz_t(), rem.get_mpz_t(), t.get_mpz_t());
    if (up && rem != 0) r += 1;
    Dyadic v(r, (a.exponent() - s) / 2);
    return up ? v.shorten_up(kRadiusBits) : v.shorten_down(kRadiusBits);
}

}  // namespace

Dyadic sqrt_up(const Dyadic& a) { return sqrt_impl(a, true); }
Dyadic sqrt_down(const Dyadic& a) { return sqrt_impl(a, false); }

Dyadic hypot_up(const Dyadic& a, const Dyadic& b) {
    Dyadic x = a.abs(), y = b.abs();
    return sqrt_up(add_up(mul_up(x, x), mul_up(y, y)));
}

Dyadic hypot_down(const Dyadic& a, const Dyadic& b) {
    Dyadic x = a.abs(), y = b.abs();
    return sqrt_down(add_down(mul_down(x, x), mul_down(y, y)));
}

Dyadic exp_up(const Dyadic& x) {
    if (x.sign() > 0 && x.mag_exp() > 48) throw DomainError("exp bound argument too large");
    return mpfr_unary_bound(x, mpfr_exp, MPFR_RNDU);
}

Dyadic exp_down(const Dyadic& x) {
    if (x.sign() > 0 && x.mag_exp() > 48) throw DomainError("exp bound argument too large");
    return mpfr_unary_bound(x, mpfr_exp, MPFR_RNDD);
}

Dyadic expm1_up(const Dyadic& x) {
    if (x.sign() > 0 && x.mag_exp() > 48) throw DomainError("exp bound argument too large");
    return mpfr_unary_bound(x, mpfr_expm1, MPFR_RNDU);
}

Dyadic pi_up() {
    mpfr_t out;
    mpfr_init2(out, kRadiusBits);
    mpfr_const_pi(out, MPFR_RNDU);
    Dyadic r = from_mpfr(out);
    mpfr_clear(out);
    return r;
}

Dyadic pi_down() {
    mpfr_t out;
    mpfr_init2(out, kRadiusBits);
    mpfr_const_pi(out, MPFR_RNDD);
    Dyadic r = from_mpfr(out);
    mpfr_clear(out);
    return r;
}

}  // namespace rnd

}  // namespace ctheta

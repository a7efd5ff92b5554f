// Complex ball arithmetic. Radius bookkeeping uses the directed helpers from
// rnd::; midpoint transcendentals use MPFR correctly-rounded operations on
// exact dyadic inputs, with the rounding error added to the radius.

#include "ctheta/ball.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cassert>
#include <stdexcept>

#include "ctheta/errors.hpp"

namespace ctheta {

namespace {

struct Mpfr {
    mpfr_t v;
    explicit Mpfr(long prec) { mpfr_init2(v, std::max<long>(2, prec)); }
    ~Mpfr() { mpfr_clear(v); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
    operator mpfr_ptr() { return v; }
    operator mpfr_srcptr() const { return v; }
};

// Exact embedding of a dyadic into an MPFR number sized to hold it.
struct MpfrExact : Mpfr {
    explicit MpfrExact(const Dyadic& x) : Mpfr(std::max<long>(2, x.mant_bits())) {
        int t = mpfr_set_z_2exp(v, x.mantissa().get_mpz_t(), x.exponent(), MPFR_RNDN);
        (void)t;
        assert(t == 0);
    }
};

Dyadic dyadic_of(mpfr_srcptr x) {
    if (mpfr_zero_p(x)) return Dyadic();
    mpz_class m;
    mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
    return Dyadic(m, (long)e);
}

// Bound on the rounding error of a correctly rounded (RNDN) result held at
// precision prec: half an ulp, i.e. 2^(E - prec - 1) with 2^(E-1) <= |v| < 2^E.
// A zero result is exact here: the exponent range is never exhausted at the
// magnitudes this library touches, so 0 only arises from an exact 0.
Dyadic half_ulp(mpfr_srcptr v, long prec) {
    if (mpfr_zero_p(v)) return Dyadic();
    return Dyadic::pow2((long)mpfr_get_exp(v) - prec - 1);
}

}  // namespace

ComplexBall::ComplexBall(Dyadic re, Dyadic im, Dyadic rad)
    : re_(std::move(re)), im_(std::move(im)), rad_(std::move(rad)) {
    if (rad_.sign() < 0) throw std::invalid_argument("negative ball radius");
}

ComplexBall ComplexBall::inflate(const Dyadic& extra) const {
    assert(extra.sign() >= 0);
    return ComplexBall(re_, im_, rnd::add_up(rad_, extra));
}

bool ComplexBall::contains_point(const Dyadic& re, const Dyadic& im) const {
    Dyadic dr = re - re_, di = im - im_;
    return dr * dr + di * di <= rad_ * rad_;
}

bool ComplexBall::contains_ball(const ComplexBall& other) const {
    // dist(mid, mid') + rad' <= rad, squared to stay in exact arithmetic.
    if (other.rad_ > rad_) return false;
    Dyadic dr = other.re_ - re_, di = other.im_ - im_;
    Dyadic slack = rad_ - other.rad_;
    return dr * dr + di * di <= slack * slack;
}

bool ComplexBall::overlaps(const ComplexBall& other) const {
    Dyadic dr = other.re_ - re_, di = other.im_ - im_;
    Dyadic reach = rad_ + other.rad_;
    return dr * dr + di * di <= reach * reach;
}

ComplexBall ComplexBall::round_mid(Precision work) const {
    Rounded r = re_.round_to_bits(work);
    Rounded i = im_.round_to_bits(work);
    if (r.error.is_zero() && i.error.is_zero()) return *this;
    return ComplexBall(r.value, i.value,
                       rnd::add_up(rad_, rnd::hypot_up(r.error, i.error)));
}

ComplexBall add(const ComplexBall& a, const ComplexBall& b, Precision work) {
    // Midpoint sums are exact; displacement from rounding both coordinates is
    // at most hypot of the two coordinate errors.
    Rounded re = (a.re_mid() + b.re_mid()).round_to_bits(work);
    Rounded im = (a.im_mid() + b.im_mid()).round_to_bits(work);
    Dyadic rad = rnd::add_up(rnd::add_up(a.radius(), b.radius()),
                             rnd::hypot_up(re.error, im.error));
    return ComplexBall(re.value, im.value, rad);
}

ComplexBall sub(const ComplexBall& a, const ComplexBall& b, Precision work) {
    return add(a, -b, work);
}

ComplexBall mul(const ComplexBall& a, const ComplexBall& b, Precision work) {
    // (ma+da)(mb+db) = ma*mb + ma*db + mb*da + da*db, so the exact product of
    // any representatives stays within |ma| rb + |mb| ra + ra rb of ma*mb.
    Rounded re = (a.re_mid() * b.re_mid() - a.im_mid() * b.im_mid()).round_to_bits(work);
    Rounded im = (a.re_mid() * b.im_mid() + a.im_mid() * b.re_mid()).round_to_bits(work);
    Dyadic spread = rnd::add_up(
        rnd::add_up(rnd::mul_up(a.abs_mid_upper(), b.radius()),
                    rnd::mul_up(b.abs_mid_upper(), a.radius())),
        rnd::mul_up(a.radius(), b.radius()));
    Dyadic rad = rnd::add_up(spread, rnd::hypot_up(re.error, im.error));
    return ComplexBall(re.value, im.value, rad);
}

ComplexBall recip(const ComplexBall& b, Precision work) {
    Dyadic lb = b.abs_lower();
    if (lb.sign() <= 0) throw DomainError("division by a ball containing zero");
    long p = work + 8;
    // Midpoint 1/mb = conj(mb) / |mb|^2 with an exact dyadic denominator, so
    // each coordinate is a single correctly rounded division.
    Dyadic den = b.re_mid() * b.re_mid() + b.im_mid() * b.im_mid();
    MpfrExact dre(b.re_mid()), dim(b.im_mid()), dden(den);
    Mpfr qre(p), qim(p);
    mpfr_div(qre, dre, dden, MPFR_RNDN);
    mpfr_div(qim, dim, dden, MPFR_RNDN);
    mpfr_neg(qim, qim, MPFR_RNDN);
    Dyadic err_mid = rnd::hypot_up(half_ulp(qre, p), half_ulp(qim, p));
    // |1/z - 1/mb| = |z - mb| / (|z| |mb|) <= rad / (lb * |mb|).
    Dyadic r_map = rnd::div_up(b.radius(), rnd::mul_down(lb, b.abs_mid_lower()));
    return ComplexBall(dyadic_of(qre), dyadic_of(qim), rnd::add_up(r_map, err_mid));
}

ComplexBall div(const ComplexBall& a, const ComplexBall& b, Precision work) {
    return mul(a, recip(b, work + 8), work);
}

bool avoids_negative_axis(const ComplexBall& a) {
    // Distance from the midpoint to {x <= 0, y = 0} is |im| when re <= 0 and
    // |mid| otherwise; compare against the radius exactly.
    if (a.re_mid().sign() <= 0) return a.im_mid().abs() > a.radius();
    Dyadic d2 = a.re_mid() * a.re_mid() + a.im_mid() * a.im_mid();
    return d2 > a.radius() * a.radius();
}

ComplexBall sqrt_principal(const ComplexBall& a, Precision work) {
    if (!a.excludes_zero()) throw DomainError("square root of a ball containing zero");
    if (!avoids_negative_axis(a)) {
        // The principal branch is discontinuous across the ball; the honest
        // enclosure is a disk around 0 of radius sqrt(max |a|).
        return ComplexBall(Dyadic(), Dyadic(), rnd::sqrt_up(a.abs_upper()));
    }
    long p = work + 8;
    const Dyadic& re = a.re_mid();
    const Dyadic& im = a.im_mid();
    // Cancellation-free midpoint root: with t = |c|, the principal root has
    // |Re w| = sqrt((t+re)/2) and |Im w| = sqrt((t-re)/2); compute the larger
    // one by a square root and the other by division to avoid t - |re|.
    Dyadic t2 = re * re + im * im;
    MpfrExact dt2(t2), dre(re), dim(im);
    Mpfr t(p), u(p), wre(p), wim(p), two_w(p);
    mpfr_sqrt(t, dt2, MPFR_RNDN);
    if (re.sign() >= 0) {
        mpfr_add(u, t, dre, MPFR_RNDN);
        mpfr_div_2ui(u, u, 1, MPFR_RNDN);
        mpfr_sqrt(wre, u, MPFR_RNDN);
        mpfr_mul_2ui(two_w, wre, 1, MPFR_RNDN);
        mpfr_div(wim, dim, two_w, MPFR_RNDN);
    } else {
        mpfr_sub(u, t, dre, MPFR_RNDN);
        mpfr_div_2ui(u, u, 1, MPFR_RNDN);
        mpfr_sqrt(wim, u, MPFR_RNDN);
        if (im.sign() < 0) mpfr_neg(wim, wim, MPFR_RNDN);
        mpfr_mul_2ui(two_w, wim, 1, MPFR_RNDN);
        mpfr_div(wre, dim, two_w, MPFR_RNDN);
    }
    Dyadic sre = dyadic_of(wre), sim = dyadic_of(wim);
    // A-posteriori midpoint error: the computed s and the true root u share a
    // half-plane (Re when re >= 0, the sign of Im otherwise) in which u has a
    // component >= |u|/sqrt(2), so |s + u| >= sqrt(|c|/2) and
    // |s - u| = |s^2 - c| / |s + u| <= sqrt(2) |s^2 - c| / sqrt(|c|).
    Dyadic eres = sre * sre - sim * sim - re;
    Dyadic eims = Dyadic(2) * sre * sim - im;
    Dyadic err_mid = rnd::div_up(rnd::mul_up(rnd::sqrt_up(Dyadic(2)), rnd::hypot_up(eres, eims)),
                                 rnd::sqrt_down(a.abs_mid_lower()));
    // Map spread: the ball avoids 0 and the cut, so arguments of its points
    // span less than pi, root arguments span less than pi/2, and
    // |sqrt(z) + sqrt(c)|^2 = |z| + |c| + 2 Re(sqrt(z) conj(sqrt(c))) >= |c|;
    // hence |sqrt(z) - sqrt(c)| = |z - c| / |sqrt(z) + sqrt(c)| <= rad/sqrt(|c|).
    Dyadic r_map = rnd::div_up(a.radius(), rnd::sqrt_down(a.abs_mid_lower()));
    return ComplexBall(sre, sim, rnd::add_up(r_map, err_mid));
}

ComplexBall sqrt_near(const ComplexBall& a, const ComplexBall& anchor, Precision work) {
    if (!a.excludes_zero()) throw DomainError("sqrt_near of a ball containing zero");
    if (!anchor.excludes_zero()) throw DomainError("sqrt_near with an anchor containing zero");
    ComplexBall root;
    if (avoids_negative_axis(a)) {
        root = sqrt_principal(a, work);
    } else {
        // A zero-excluding disk meeting {x <= 0} cannot also meet {x >= 0}
        // (the segment between such points passes through 0), so -a avoids
        // the closed negative axis and i*sqrt(-a) is an analytic root of a.
        root = mul_i(sqrt_principal(-a, work));
    }
    ComplexBall d = mul(root, anchor.conj(), work);
    if (d.re_lower().sign() > 0) return root;
    if (d.re_upper().sign() < 0) return -root;
    throw AmbiguousBranch("square root candidates not separated by the anchor");
}

ComplexBall exp_ball(const ComplexBall& a, Precision work) {
    long p = work + 8;
    const Dyadic& x = a.re_mid();
    const Dyadic& y = a.im_mid();
    Dyadic ex_up = rnd::exp_up(x);
    MpfrExact dx(x), dy(y);
    Mpfr ex(p), c(p), s(p), pre(p), pim(p);
    mpfr_exp(ex, dx, MPFR_RNDN);
    mpfr_sin_cos(s, c, dy, MPFR_RNDN);
    mpfr_mul(pre, ex, c, MPFR_RNDN);
    mpfr_mul(pim, ex, s, MPFR_RNDN);
    // Error budget per coordinate, e.g. for the real part:
    //   |pre - e^x cos y| <= half_ulp(pre) + |ex| err_c + |cos y| err_ex
    //                        + err_ex err_c
    // with |ex| <= 2^E(ex), |cos y| <= 1 and err_c, err_s <= half_ulp.
    Dyadic err_ex = half_ulp(ex, p);
    Dyadic err_c = half_ulp(c, p), err_s = half_ulp(s, p);
    Dyadic mag_ex = mpfr_zero_p(ex.v) ? Dyadic() : Dyadic::pow2((long)mpfr_get_exp(ex.v));
    Dyadic cross = rnd::mul_up(err_ex, rnd::add_up(err_c, err_s));
    Dyadic e_re = rnd::add_up(rnd::add_up(half_ulp(pre, p), rnd::mul_up(mag_ex, err_c)),
                              rnd::add_up(err_ex, cross));
    Dyadic e_im = rnd::add_up(rnd::add_up(half_ulp(pim, p), rnd::mul_up(mag_ex, err_s)),
                              rnd::add_up(err_ex, cross));
    Dyadic err_mid = rnd::hypot_up(e_re, e_im);
    // |e^(c+d) - e^c| = |e^c| |e^d - 1| <= e^(Re c) (e^rad - 1).
    Dyadic r_map = rnd::mul_up(ex_up, rnd::expm1_up(a.radius()));
    return ComplexBall(dyadic_of(pre), dyadic_of(pim), rnd::add_up(r_map, err_mid));
}

ComplexBall log_ball(const ComplexBall& a, Precision work) {
    if (!a.excludes_zero() || !avoids_negative_axis(a))
        throw DomainError("log of a ball meeting zero or the branch cut");
    long p = work + 8;
    // Re log c = log(re^2 + im^2) / 2 with an exact dyadic square sum;
    // Im log c = atan2(im, re), both single correctly rounded calls.
    Dyadic d2 = a.re_mid() * a.re_mid() + a.im_mid() * a.im_mid();
    MpfrExact dd2(d2), dre(a.re_mid()), dim(a.im_mid());
    Mpfr lre(p), lim(p);
    mpfr_log(lre, dd2, MPFR_RNDN);
    Dyadic err_re = half_ulp(lre, p).mul_pow2(-1);
    mpfr_div_2ui(lre, lre, 1, MPFR_RNDN);
    mpfr_atan2(lim, dim, dre, MPFR_RNDN);
    Dyadic err_mid = rnd::hypot_up(err_re, half_ulp(lim, p));
    // Mean value bound on the convex ball: |log z - log c| <= rad / min |w|.
    Dyadic r_map = rnd::div_up(a.radius(), a.abs_lower());
    return ComplexBall(dyadic_of(lre), dyadic_of(lim), rnd::add_up(r_map, err_mid));
}

ComplexBall pi_ball(Precision work) {
    long p = work + 4;
    Mpfr v(p);
    mpfr_const_pi(v, MPFR_RNDN);
    return ComplexBall(dyadic_of(v), Dyadic(), half_ulp(v, p));
}

ComplexBall mul_pow2(const ComplexBall& a, long k) {
    return ComplexBall(a.re_mid().mul_pow2(k), a.im_mid().mul_pow2(k), a.radius().mul_pow2(k));
}

ComplexBall unit_mul(const ComplexBall& a, int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return a;
        case 1: return ComplexBall(-a.im_mid(), a.re_mid(), a.radius());
        case 2: return -a;
        default: return ComplexBall(a.im_mid(), -a.re_mid(), a.radius());
    }
}

ComplexBall mul_i(const ComplexBall& a) { return unit_mul(a, 1); }

ComplexBall mul_dyadic(const ComplexBall& a, const Dyadic& c, Precision work) {
    Rounded re = (a.re_mid() * c).round_to_bits(work);
    Rounded im = (a.im_mid() * c).round_to_bits(work);
    Dyadic rad = rnd::add_up(rnd::mul_up(c.abs(), a.radius()),
                             rnd::hypot_up(re.error, im.error));
    return ComplexBall(re.value, im.value, rad);
}

ComplexBall mul_si(const ComplexBall& a, long c, Precision work) {
    return mul_dyadic(a, Dyadic(c), work);
}

}  // namespace ctheta

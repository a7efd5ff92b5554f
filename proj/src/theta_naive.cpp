// Theta series evaluation by certified partial sums. Genus 1 sums the two
// symmetric half-series with term recursions (two ball multiplications per
// index); genus 2 walks max-norm shells and exponentiates the exact quadratic
// form per lattice point. Tails are bounded by geometric majorization from
// the first dropped index.

#include "ctheta/theta_naive.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ctheta/errors.hpp"

namespace ctheta {

namespace {

// Upper bound on 2 * sum_{nu = nu0, nu0+1, ...} exp(-pi nu^2 y + 2 pi nu z)
// for y >= y_low > 0 and z <= zeta_up, indices advancing by 1 (nu0 may be a
// half-integer). The term ratio exp(-pi (2 nu + 1) y + 2 pi z) is largest at
// nu = nu0, so the series is dominated by a geometric one matching its first
// term. nullopt when that ratio cannot be certified < 1.
std::optional<Dyadic> theta_tail_nu(const Dyadic& nu0, const Dyadic& y_low,
                                    const Dyadic& zeta_up) {
    const Dyadic pi_up = rnd::pi_up();
    const Dyadic pi_down = rnd::pi_down();

    // Upper bound for an exp argument of the form 2 pi nu z - pi c y with
    // nu, c > 0: round the positive part up, the subtracted part down;
    // the final subtraction is exact.
    auto exp_arg_up = [&](const Dyadic& nu, const Dyadic& c) {
        Dyadic pos = rnd::mul_up(rnd::mul_up(pi_up.mul_pow2(1), nu), zeta_up);
        Dyadic neg = rnd::mul_down(rnd::mul_down(pi_down, c), y_low);
        return (pos - neg).shorten_up(64);
    };

    Dyadic ratio_arg = exp_arg_up(Dyadic(1), nu0.mul_pow2(1) + Dyadic(1));
    if (ratio_arg.sign() >= 0) return std::nullopt;  // ratio >= 1, no decay
    Dyadic q0 = rnd::exp_up(ratio_arg);
    Dyadic denom = rnd::sub_down(Dyadic(1), q0);
    if (denom.sign() <= 0) return std::nullopt;

    Dyadic first_arg = exp_arg_up(nu0, nu0 * nu0);
    if (first_arg.sign() > 0 && first_arg.mag_exp() > 40) return std::nullopt;
    Dyadic first = rnd::exp_up(first_arg);
    return rnd::div_up(first.mul_pow2(1), denom);
}

}  // namespace

Characteristic Characteristic::g1(int a, int b) {
    if ((a & ~1) || (b & ~1)) throw std::invalid_argument("characteristic entries must be 0 or 1");
    Characteristic ch;
    ch.g = 1;
    ch.a[0] = a;
    ch.b[0] = b;
    return ch;
}

Characteristic Characteristic::g2(int a1, int a2, int b1, int b2) {
    if ((a1 & ~1) || (a2 & ~1) || (b1 & ~1) || (b2 & ~1))
        throw std::invalid_argument("characteristic entries must be 0 or 1");
    Characteristic ch;
    ch.g = 2;
    ch.a[0] = a1;
    ch.a[1] = a2;
    ch.b[0] = b1;
    ch.b[1] = b2;
    return ch;
}

PeriodPoint PeriodPoint::constants_g1(const ComplexBall& tau) {
    PeriodPoint p;
    p.g = 1;
    p.tau11 = tau;
    return p;
}

PeriodPoint PeriodPoint::functions_g1(const ComplexBall& z, const ComplexBall& tau) {
    PeriodPoint p = constants_g1(tau);
    p.has_z = true;
    p.z1 = z;
    return p;
}

PeriodPoint PeriodPoint::constants_g2(const ComplexBall& t11, const ComplexBall& t12,
                                      const ComplexBall& t22) {
    PeriodPoint p;
    p.g = 2;
    p.tau11 = t11;
    p.tau12 = t12;
    p.tau22 = t22;
    return p;
}

PeriodPoint PeriodPoint::functions_g2(const ComplexBall& z1, const ComplexBall& z2,
                                      const ComplexBall& t11, const ComplexBall& t12,
                                      const ComplexBall& t22) {
    PeriodPoint p = constants_g2(t11, t12, t22);
    p.has_z = true;
    p.z1 = z1;
    p.z2 = z2;
    return p;
}

namespace {

// Lower bound on det(Im tau) over a genus-2 point: the diagonal lower bounds
// and the largest |Im tau12| over its ball give
// det >= y11_low * y22_low - y12_max^2 whenever the diagonal bounds are > 0.
Dyadic g2_det_im_lower(const PeriodPoint& p) {
    Dyadic y11 = p.tau11.im_lower();
    Dyadic y22 = p.tau22.im_lower();
    if (y11.sign() <= 0 || y22.sign() <= 0) return Dyadic();
    Dyadic y12a = p.tau12.im_lower().abs();
    Dyadic y12b = p.tau12.im_upper().abs();
    Dyadic y12 = (y12a < y12b) ? y12b : y12a;
    return rnd::sub_down(rnd::mul_down(y11, y22), rnd::mul_up(y12, y12));
}

}  // namespace

void PeriodPoint::validate() const {
    if (g == 1) {
        if (tau11.im_lower().sign() <= 0)
            throw DomainError("Im tau > 0 violated (ball im lower bound not positive)");
        return;
    }
    if (g != 2) throw std::invalid_argument("genus must be 1 or 2");
    if (tau11.im_lower().sign() <= 0)
        throw DomainError("Im tau11 > 0 violated (ball im lower bound not positive)");
    if (g2_det_im_lower(*this).sign() <= 0)
        throw DomainError("det Im tau > 0 violated (ball lower bound not positive)");
}

Dyadic PeriodPoint::im_tau_min_eig_lower() const {
    if (g == 1) return tau11.im_lower();
    // For positive definite 2x2 Y, lambda_min = det(Y)/lambda_max >= det/trace.
    Dyadic det = g2_det_im_lower(*this);
    Dyadic trace = rnd::add_up(tau11.im_upper(), tau22.im_upper());
    return rnd::div_down(det, trace);
}

Dyadic PeriodPoint::im_z_norm_upper() const {
    if (!has_z) return Dyadic();
    Dyadic a = rnd::add_up(z1.im_mid().abs(), z1.radius());
    if (g == 1) return a;
    Dyadic b = rnd::add_up(z2.im_mid().abs(), z2.radius());
    return rnd::hypot_up(a, b);
}

PeriodPoint PeriodPoint::midpoints() const {
    PeriodPoint p = *this;
    p.tau11 = p.tau11.midpoint();
    p.tau12 = p.tau12.midpoint();
    p.tau22 = p.tau22.midpoint();
    p.z1 = p.z1.midpoint();
    p.z2 = p.z2.midpoint();
    return p;
}

std::optional<Dyadic> tail_bound_g1(const Dyadic& im_tau_lower, const Dyadic& im_z_upper,
                                    long R) {
    if (R < 1) throw std::invalid_argument("tail cutoff must be >= 1");
    if (im_tau_lower.sign() <= 0) throw DomainError("Im tau lower bound must be positive");
    if (im_z_upper.sign() < 0) throw std::invalid_argument("im_z_upper must be >= 0");
    return theta_tail_nu(Dyadic(R), im_tau_lower, im_z_upper);
}

std::optional<Dyadic> tail_bound_g2(const Dyadic& lambda_min_lower,
                                    const Dyadic& im_z_norm_upper, long R) {
    if (R < 1) throw std::invalid_argument("tail cutoff must be >= 1");
    if (lambda_min_lower.sign() <= 0)
        throw DomainError("Im tau eigenvalue lower bound must be positive");
    if (im_z_norm_upper.sign() < 0) throw std::invalid_argument("im_z_norm_upper must be >= 0");

    const Dyadic pi_up = rnd::pi_up();
    const Dyadic pi_down = rnd::pi_down();

    // Shell ||m||_inf = k >= R has 8k points, each with ||m + a/2|| in
    // [k - 1/2, sqrt(2)(k + 1/2)], so its terms are bounded by
    // exp(h(||m + a/2||)) with h(t) = -pi lambda t^2 + 2 pi zeta t. Taking
    // h at the left endpoint t = k - 1/2 requires h nonincreasing there,
    // i.e. k - 1/2 >= zeta/lambda; we check it at k = R (larger k is easier).
    Dyadic nu = Dyadic(2 * R - 1).mul_pow2(-1);
    if (rnd::mul_down(nu, lambda_min_lower) < im_z_norm_upper) return std::nullopt;

    auto h_up = [&](const Dyadic& t) {
        Dyadic pos = rnd::mul_up(rnd::mul_up(pi_up.mul_pow2(1), t), im_z_norm_upper);
        Dyadic neg = rnd::mul_down(rnd::mul_down(pi_down, lambda_min_lower), t * t);
        return (pos - neg).shorten_up(64);
    };

    // Shell-to-shell ratio: (k+1)/k * exp(h(k+1/2) - h(k-1/2)) and
    // h(k+1/2) - h(k-1/2) = -2 pi lambda k + 2 pi zeta, worst at k = R.
    Dyadic ratio_arg =
        (rnd::mul_up(pi_up.mul_pow2(1), im_z_norm_upper) -
         rnd::mul_down(rnd::mul_down(pi_down.mul_pow2(1), lambda_min_lower), Dyadic(R)))
            .shorten_up(64);
    if (ratio_arg.sign() > 0 && ratio_arg.mag_exp() > 40) return std::nullopt;
    Dyadic q2 = rnd::mul_up(rnd::div_up(Dyadic(R + 1), Dyadic(R)), rnd::exp_up(ratio_arg));
    Dyadic denom = rnd::sub_down(Dyadic(1), q2);
    if (denom.sign() <= 0) return std::nullopt;

    Dyadic first_arg = h_up(nu);
    if (first_arg.sign() > 0 && first_arg.mag_exp() > 40) return std::nullopt;
    Dyadic first = rnd::mul_up(Dyadic(8 * R), rnd::exp_up(first_arg));
    return rnd::div_up(first, denom);
}

namespace {

// Partial sum of the genus-1 series over indices |n| <= R (a = 0) or over
// the 2R half-integer indices closest to 0 (a = 1). Consecutive terms on
// each side differ by a factor q^(2n+const) * exp(+-2 pi i z) * (-1)^b, so
// each index costs two ball multiplications.
ComplexBall theta_sum_g1(const Characteristic& ch, const PeriodPoint& p, Precision w,
                         long R) {
    const ComplexBall& tau = p.tau11;
    ComplexBall z = p.has_z ? p.z1 : ComplexBall();
    int b = ch.b[0];

    ComplexBall pb = pi_ball(w);
    ComplexBall ipt = mul_i(mul(pb, tau, w));      // i pi tau
    ComplexBall q1 = exp_ball(ipt, w);             // exp(i pi tau)
    ComplexBall q2 = mul(q1, q1, w);
    ComplexBall ipz = mul_i(mul(pb, z, w));        // i pi z

    ComplexBall acc, t_up, t_dn, r_up, r_dn;
    long steps = 0;
    if (ch.a[0] == 0) {
        ComplexBall vs = exp_ball(mul_pow2(ipz, 1), w);   // exp(2 pi i z)
        ComplexBall ws = exp_ball(mul_pow2(-ipz, 1), w);  // exp(-2 pi i z)
        if (b) {
            vs = -vs;
            ws = -ws;
        }
        acc = ComplexBall(Dyadic(1));
        t_up = acc;
        t_dn = acc;
        r_up = mul(q1, vs, w);
        r_dn = mul(q1, ws, w);
        steps = R;
    } else {
        ComplexBall seed = exp_ball(mul_pow2(ipt, -2), w);  // exp(i pi tau / 4)
        ComplexBall ezp = exp_ball(ipz, w);
        ComplexBall ezm = exp_ball(-ipz, w);
        t_up = unit_mul(mul(seed, ezp, w), b);    // n = 0 term, index 1/2
        t_dn = unit_mul(mul(seed, ezm, w), -b);   // n = -1 term, index -1/2
        acc = add(t_up, t_dn, w);
        ComplexBall vs = mul(ezp, ezp, w);
        ComplexBall ws = mul(ezm, ezm, w);
        if (b) {
            vs = -vs;
            ws = -ws;
        }
        r_up = mul(q2, vs, w);
        r_dn = mul(q2, ws, w);
        steps = R - 1;
    }
    for (long n = 0; n < steps; ++n) {
        t_up = mul(t_up, r_up, w);
        t_dn = mul(t_dn, r_dn, w);
        acc = add(acc, add(t_up, t_dn, w), w);
        r_up = mul(r_up, q2, w);
        r_dn = mul(r_dn, q2, w);
    }
    return acc;
}

// Partial sum of the genus-2 series over max-norm shells 0..R, each term
// exponentiated from the exact half-integer index vector v = m + a/2.
ComplexBall theta_sum_g2(const Characteristic& ch, const PeriodPoint& p, Precision w,
                         long R) {
    ComplexBall pb = pi_ball(w);
    ComplexBall ip11 = mul_i(mul(pb, p.tau11, w));
    ComplexBall ip12 = mul_i(mul(pb, p.tau12, w));
    ComplexBall ip22 = mul_i(mul(pb, p.tau22, w));

    ComplexBall z1 = p.has_z ? p.z1 : ComplexBall();
    ComplexBall z2 = p.has_z ? p.z2 : ComplexBall();
    ComplexBall zb1 = add(z1, ComplexBall(Dyadic(ch.b[0]).mul_pow2(-1)), w);
    ComplexBall zb2 = add(z2, ComplexBall(Dyadic(ch.b[1]).mul_pow2(-1)), w);
    ComplexBall lin1 = mul_pow2(mul_i(mul(pb, zb1, w)), 1);  // 2 pi i (z1 + b1/2)
    ComplexBall lin2 = mul_pow2(mul_i(mul(pb, zb2, w)), 1);
    bool use_lin1 = !(lin1.is_exact() && lin1.re_mid().is_zero() && lin1.im_mid().is_zero());
    bool use_lin2 = !(lin2.is_exact() && lin2.re_mid().is_zero() && lin2.im_mid().is_zero());

    ComplexBall acc;
    auto add_term = [&](long m1, long m2) {
        Dyadic v1 = Dyadic(2 * m1 + ch.a[0]).mul_pow2(-1);
        Dyadic v2 = Dyadic(2 * m2 + ch.a[1]).mul_pow2(-1);
        ComplexBall arg = mul_dyadic(ip11, v1 * v1, w);
        arg = add(arg, mul_dyadic(ip12, (v1 * v2).mul_pow2(1), w), w);
        arg = add(arg, mul_dyadic(ip22, v2 * v2, w), w);
        if (use_lin1) arg = add(arg, mul_dyadic(lin1, v1, w), w);
        if (use_lin2) arg = add(arg, mul_dyadic(lin2, v2, w), w);
        acc = add(acc, exp_ball(arg, w), w);
    };

    add_term(0, 0);
    for (long k = 1; k <= R; ++k) {
        for (long m2 = -k; m2 <= k; ++m2) {
            add_term(k, m2);
            add_term(-k, m2);
        }
        for (long m1 = -k + 1; m1 <= k - 1; ++m1) {
            add_term(m1, k);
            add_term(m1, -k);
        }
    }
    return acc;
}

long env_guard_override() {
    const char* s = std::getenv("THETA_GUARD_BITS");
    if (!s || !*s) return -1;
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0' || v < 0 || v > 1000000) return -1;
    return v;
}

}  // namespace

ComplexBall theta_naive(const Characteristic& ch, const PeriodPoint& p, Precision target) {
    if (ch.g != p.g) throw std::invalid_argument("characteristic and point genus differ");
    if (target < 1) throw std::invalid_argument("target precision must be >= 1");
    p.validate();

    // Odd characteristics pair each term with its negated index: the theta
    // constant is exactly 0, no summation needed.
    if (!p.has_z && !ch.is_even()) return ComplexBall(Dyadic());

    Dyadic lambda = p.im_tau_min_eig_lower();
    Dyadic zeta = p.im_z_norm_upper();
    double lam_d = lambda.to_double();
    double zeta_d = zeta.to_double();
    if (!(lam_d > 1e-200))
        throw PrecisionError("Im tau lower bound too small for series evaluation", 0);

    // Tail of the first dropped index for a given cutoff. Sides with
    // integer indices drop from R+1; half-integer sides from R+1/2; genus-2
    // shells from R+1.
    auto tail_at = [&](long R) -> std::optional<Dyadic> {
        if (p.g == 2) return tail_bound_g2(lambda, zeta, R + 1);
        if (ch.a[0] == 0) return theta_tail_nu(Dyadic(R + 1), lambda, zeta);
        return theta_tail_nu(Dyadic(2 * R + 1).mul_pow2(-1), lambda, zeta);
    };

    // Start near the analytic estimate exp(-pi lambda R^2) ~ 2^-target and
    // grow until the proven bound clears the budget.
    const double kLog2E = 1.4426950408889634;
    Dyadic tail_budget = Dyadic::pow2(-(target + 2));
    long R = (long)std::ceil(std::sqrt((double)(target + 8) / (M_PI * lam_d * kLog2E))) +
             (long)std::ceil(zeta_d / lam_d) + 2;
    if (R < 2) R = 2;
    const long cap = 4 * R + 1024;
    std::optional<Dyadic> tail;
    for (;; R += 1 + R / 16) {
        if (R > cap)
            throw PrecisionError("series cutoff exceeded safety cap (Im tau too small)", 0);
        tail = tail_at(R);
        if (tail && *tail <= tail_budget) break;
    }

    // Working-precision guard: per-term rounding errors are about
    // 2^(peak - w) with peak the largest term magnitude in bits, and there
    // are `terms` of them.
    double terms = (p.g == 1) ? (double)(2 * R + 2) : (double)(2 * R + 1) * (2 * R + 1);
    long lg_terms = (long)std::ceil(std::log2(terms));
    long peak = 0;
    if (zeta_d > 0) peak = (long)std::ceil(M_PI * zeta_d * zeta_d / lam_d * kLog2E) + 2;
    long guard = env_guard_override();
    if (guard < 0) guard = 10 + lg_terms + peak;

    Dyadic target_rad = Dyadic::pow2(-target);
    ComplexBall result;
    for (int attempt = 0; attempt < 2; ++attempt) {
        Precision w = target + guard + (attempt ? 64 : 0);
        ComplexBall sum =
            (p.g == 1) ? theta_sum_g1(ch, p, w, R) : theta_sum_g2(ch, p, w, R);
        result = sum.inflate(*tail).round_mid(target + 12 + peak + lg_terms);
        if (result.radius() <= target_rad) return result;
    }
    // One headroom bit so re-running at the reported precision succeeds even
    // after its own (smaller) tail and rounding contributions.
    Precision achievable =
        result.radius().is_zero() ? target : -result.radius().mag_exp() - 1;
    throw PrecisionError("theta series radius exceeds 2^-target (input balls too wide)",
                         achievable);
}

}  // namespace ctheta

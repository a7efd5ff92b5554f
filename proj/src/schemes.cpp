#include "ctheta/schemes.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <utility>

#include "ctheta/borchardt.hpp"
#include "ctheta/errors.hpp"

namespace ctheta {

namespace {

int genus_of(SchemeVariant v) { return v == SchemeVariant::kG2Const ? 2 : 1; }

const char* variant_name(SchemeVariant v) {
    switch (v) {
        case SchemeVariant::kG1Const:
            return "g1_constants";
        case SchemeVariant::kG1Func:
            return "g1_functions";
        case SchemeVariant::kG2Const:
            return "g2_constants";
    }
    return "?";
}

ComplexBall exact_one() { return ComplexBall(Dyadic(1)); }

// Exact dyadic ball at the midpoint of b, coordinates rounded to `bits`
// significant bits.
ComplexBall round_exact(const ComplexBall& b, Precision bits) {
    return ComplexBall(b.re_mid().round_to_bits(bits).value,
                       b.im_mid().round_to_bits(bits).value);
}

// Exact complex product / difference of exact balls (dyadic arithmetic, no
// rounding). Used to build Newton targets that are honest dyadic points.
ComplexBall exact_cmul(const ComplexBall& a, const ComplexBall& b) {
    const Dyadic re = a.re_mid() * b.re_mid() - a.im_mid() * b.im_mid();
    const Dyadic im = a.re_mid() * b.im_mid() + a.im_mid() * b.re_mid();
    return ComplexBall(re, im);
}

ComplexBall exact_csub(const ComplexBall& a, const ComplexBall& b) {
    return ComplexBall(a.re_mid() - b.re_mid(), a.im_mid() - b.im_mid());
}

const ComplexBall& require_nonzero(const ComplexBall& b, const char* what) {
    if (!b.excludes_zero())
        throw OutsideBasin(std::string(what) + ": ball that must stay away from zero touches it");
    return b;
}

long log2_pow2(const Dyadic& d) { return d.mag_exp() - 1; }

// ---------------------------------------------------------------------------
// Reduced-domain membership

struct Interval {
    Dyadic lo;
    Dyadic hi;
};

Interval re_iv(const ComplexBall& b) { return {b.re_lower(), b.re_upper()}; }
Interval im_iv(const ComplexBall& b) { return {b.im_lower(), b.im_upper()}; }

Interval abs_iv(const Interval& v) {
    if (v.lo.sign() >= 0) return v;
    if (v.hi.sign() <= 0) return {-v.hi, -v.lo};
    return {Dyadic(), (-v.lo < v.hi) ? v.hi : -v.lo};
}

Interval scale_iv(const Interval& v, long k) { return {v.lo.mul_pow2(k), v.hi.mul_pow2(k)}; }

// v <= w for every point choice?
Tristate le_iv(const Interval& v, const Interval& w) {
    if (v.hi <= w.lo) return Tristate::kTrue;
    if (v.lo > w.hi) return Tristate::kFalse;
    return Tristate::kIndeterminate;
}

Tristate le_iv(const Interval& v, const Dyadic& c) { return le_iv(v, Interval{c, c}); }

Tristate positive_iv(const Interval& v) {
    if (v.lo.sign() > 0) return Tristate::kTrue;
    if (v.hi.sign() <= 0) return Tristate::kFalse;
    return Tristate::kIndeterminate;
}

Tristate abs_ge_one(const ComplexBall& b) {
    if (b.abs_lower() >= Dyadic(1)) return Tristate::kTrue;
    if (b.abs_upper() < Dyadic(1)) return Tristate::kFalse;
    return Tristate::kIndeterminate;
}

Tristate both(Tristate a, Tristate b) {
    if (is_false(a) || is_false(b)) return Tristate::kFalse;
    if (is_true(a) && is_true(b)) return Tristate::kTrue;
    return Tristate::kIndeterminate;
}

Tristate in_r1(const ComplexBall& tau) {
    Tristate v = positive_iv(im_iv(tau));
    v = both(v, le_iv(abs_iv(re_iv(tau)), Dyadic::pow2(-1)));
    v = both(v, abs_ge_one(tau));
    v = both(v, le_iv(im_iv(tau), Dyadic(2)));
    return v;
}

// ---------------------------------------------------------------------------
// Borchardt bounds packs for the extended means of the function scheme.
// The certified brackets are M0 <= 1.94, m >= 0.51 for the sequence started
// at (z, tau) and M0 <= 1.69, m >= 0.1 for the one started at the transported
// point; the runtime packs round them outward to dyadics.

BorchardtBounds g1func_pack_base() {
    BorchardtBounds b;
    b.M0 = Dyadic(2);
    b.m_inf = Dyadic::pow2(-1);
    return b;
}

BorchardtBounds g1func_pack_transported() {
    BorchardtBounds b;
    b.M0 = Dyadic(7, -2);
    b.m_inf = Dyadic(3, -5);
    return b;
}

// ---------------------------------------------------------------------------
// Low-precision theta quotients straight from the series, used both to seed
// the Newton iteration and to sanity-check externally supplied quotients.

std::vector<ComplexBall> naive_quotients(SchemeVariant v, const PeriodPoint& pm, Precision n) {
    const Precision work = n + 8;
    std::vector<ComplexBall> out;
    const ComplexBall tau_half = mul_pow2(pm.tau11, -1);
    switch (v) {
        case SchemeVariant::kG1Const:
        case SchemeVariant::kG1Func: {
            const PeriodPoint ph = PeriodPoint::constants_g1(tau_half);
            const ComplexBall t0 = theta_naive(Characteristic::g1(0, 0), ph, work);
            const ComplexBall t1 = theta_naive(Characteristic::g1(0, 1), ph, work);
            out.push_back(div(t1, require_nonzero(t0, "theta_00(0, tau/2)"), work));
            if (v == SchemeVariant::kG1Func) {
                const ComplexBall z = pm.has_z ? pm.z1 : ComplexBall();
                const PeriodPoint pf = PeriodPoint::functions_g1(z, tau_half);
                const ComplexBall f0 = theta_naive(Characteristic::g1(0, 0), pf, work);
                const ComplexBall f1 = theta_naive(Characteristic::g1(0, 1), pf, work);
                out.push_back(div(f1, require_nonzero(f0, "theta_00(z, tau/2)"), work));
            }
            return out;
        }
        case SchemeVariant::kG2Const: {
            const PeriodPoint ph = PeriodPoint::constants_g2(tau_half, mul_pow2(pm.tau12, -1),
                                                             mul_pow2(pm.tau22, -1));
            const ComplexBall t0 = theta_naive(Characteristic::g2(0, 0, 0, 0), ph, work);
            require_nonzero(t0, "theta_0000(0, tau/2)");
            out.push_back(div(theta_naive(Characteristic::g2(0, 0, 0, 1), ph, work), t0, work));
            out.push_back(div(theta_naive(Characteristic::g2(0, 0, 1, 0), ph, work), t0, work));
            out.push_back(div(theta_naive(Characteristic::g2(0, 0, 1, 1), ph, work), t0, work));
            return out;
        }
    }
    throw std::invalid_argument("unknown scheme variant");
}

// The ten even genus-2 characteristics in the output order of
// duplication_squared_quotients, as (a-index, b-index) pairs with
// idx = 2 * first_entry + second_entry.
constexpr int kEvenG2[10][2] = {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 0},
                                {1, 2}, {2, 0}, {2, 1}, {3, 0}, {3, 3}};

Characteristic even_g2_char(int i) {
    const int a = kEvenG2[i][0];
    const int b = kEvenG2[i][1];
    return Characteristic::g2(a >> 1, a & 1, b >> 1, b & 1);
}

}  // namespace

// ---------------------------------------------------------------------------

Tristate in_reduced_domain(SchemeVariant variant, const PeriodPoint& p) {
    if (p.g != genus_of(variant))
        throw std::invalid_argument("in_reduced_domain: point genus does not match the scheme");
    switch (variant) {
        case SchemeVariant::kG1Const:
            if (p.has_z)
                throw std::invalid_argument("in_reduced_domain: genus-1 constants scheme got a z");
            return in_r1(p.tau11);
        case SchemeVariant::kG1Func: {
            Tristate v = in_r1(p.tau11);
            const ComplexBall z = p.has_z ? p.z1 : ComplexBall();
            v = both(v, le_iv(abs_iv(re_iv(z)), Dyadic::pow2(-3)));
            v = both(v, le_iv(abs_iv(im_iv(z)), scale_iv(im_iv(p.tau11), -3)));
            return v;
        }
        case SchemeVariant::kG2Const: {
            if (p.has_z)
                throw std::invalid_argument("in_reduced_domain: genus-2 scheme covers constants only");
            Tristate v = positive_iv(im_iv(p.tau11));
            for (const ComplexBall* t : {&p.tau11, &p.tau12, &p.tau22})
                v = both(v, le_iv(abs_iv(re_iv(*t)), Dyadic::pow2(-1)));
            v = both(v, le_iv(scale_iv(abs_iv(im_iv(p.tau12)), 1), im_iv(p.tau11)));
            v = both(v, le_iv(im_iv(p.tau11), im_iv(p.tau22)));
            v = both(v, abs_ge_one(p.tau11));
            v = both(v, abs_ge_one(p.tau22));
            v = both(v, le_iv(im_iv(p.tau11), Dyadic(2)));
            v = both(v, le_iv(im_iv(p.tau22), Dyadic(8)));
            return v;
        }
    }
    throw std::invalid_argument("unknown scheme variant");
}

const SchemeDescriptor& scheme_descriptor(SchemeVariant variant) {
    static const SchemeDescriptor g1c = [] {
        SchemeDescriptor d;
        d.variant = SchemeVariant::kG1Const;
        d.r = 1;
        d.constants = SchemeConstants::adjusted(1, Dyadic::pow2(-13), Dyadic(27), Dyadic(125));
        d.seed_bits = d.constants.n0;
        return d;
    }();
    static const SchemeDescriptor g1f = [] {
        SchemeDescriptor d;
        d.variant = SchemeVariant::kG1Func;
        d.r = 2;
        mpz_class m;
        mpz_ui_pow_ui(m.get_mpz_t(), 10, 220);
        m *= 43;
        d.constants = SchemeConstants::adjusted(2, Dyadic::pow2(-16), Dyadic(m, 0), Dyadic(86000));
        d.seed_bits = d.constants.n0;
        return d;
    }();
    static const SchemeDescriptor g2c = [] {
        SchemeDescriptor d;
        d.variant = SchemeVariant::kG2Const;
        d.r = 3;
        d.constants = SchemeConstants::adjusted(3, Dyadic::pow2(-76), Dyadic(45000), Dyadic(13000));
        d.seed_bits = d.constants.n0;
        return d;
    }();
    switch (variant) {
        case SchemeVariant::kG1Const:
            return g1c;
        case SchemeVariant::kG1Func:
            return g1f;
        case SchemeVariant::kG2Const:
            return g2c;
    }
    throw std::invalid_argument("unknown scheme variant");
}

std::vector<ComplexBall> duplication_squared_quotients(SchemeVariant variant,
                                                       const std::vector<ComplexBall>& x,
                                                       Precision work) {
    if (work < 8) throw std::invalid_argument("duplication_squared_quotients: work too small");
    const ComplexBall one = exact_one();
    switch (variant) {
        case SchemeVariant::kG1Const: {
            if (x.size() != 1)
                throw std::invalid_argument("duplication_squared_quotients: want 1 quotient");
            const ComplexBall xx = mul(x[0], x[0], work);
            return {mul_pow2(add(one, xx, work), -1), x[0], mul_pow2(sub(one, xx, work), -1)};
        }
        case SchemeVariant::kG1Func: {
            if (x.size() != 2)
                throw std::invalid_argument("duplication_squared_quotients: want 2 quotients");
            std::vector<ComplexBall> out =
                duplication_squared_quotients(SchemeVariant::kG1Const, {x[0]}, work);
            const ComplexBall prod = mul(x[0], x[1], work);
            out.push_back(mul_pow2(add(one, prod, work), -1));
            out.push_back(mul_pow2(add(x[0], x[1], work), -1));
            out.push_back(mul_pow2(sub(one, prod, work), -1));
            out.push_back(mul_pow2(sub(x[1], x[0], work), -1));
            return out;
        }
        case SchemeVariant::kG2Const: {
            if (x.size() != 3)
                throw std::invalid_argument("duplication_squared_quotients: want 3 quotients");
            const ComplexBall t[4] = {one, x[0], x[1], x[2]};
            std::vector<ComplexBall> out;
            out.reserve(10);
            for (const auto& ab : kEvenG2) {
                const int a = ab[0];
                const int b = ab[1];
                ComplexBall acc;
                for (int j = 0; j < 4; ++j) {
                    const ComplexBall term = mul(t[j], t[j ^ b], work);
                    const int parity = ((a >> 1) & (j >> 1)) ^ (a & j & 1);
                    acc = parity ? sub(acc, term, work) : add(acc, term, work);
                }
                out.push_back(mul_pow2(acc, -2));
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown scheme variant");
}

// ---------------------------------------------------------------------------
// The maps F. Shared structure: one duplication step turns the input
// quotients into squared quotients at tau, those normalize to Borchardt
// starting tuples whose means are 1/theta_00^2 at tau and at one or more
// transported points, and modular feedback identities turn ratios of means
// into the target coordinates. A guard ladder reruns everything with more
// slack when the requested radius was missed; structural failures
// (good-position, vanishing denominators, bound violations inside the
// extended mean) are reported as OutsideBasin.

namespace {

constexpr int kMaxAttempts = 4;

[[noreturn]] void rethrow_as_basin(const char* who, const std::exception& e) {
    throw OutsideBasin(std::string(who) + ": " + e.what());
}

}  // namespace

ComplexBall eval_F_g1const(const ComplexBall& x, Precision p) {
    if (p < 8) throw std::invalid_argument("eval_F_g1const: target too small");
    const char* who = "eval_F_g1const";
    for (int attempt = 0;; ++attempt) {
        const Precision guard = 32L << attempt;
        const Precision work = p + guard + 160;
        try {
            const auto q = duplication_squared_quotients(SchemeVariant::kG1Const, {x}, work);
            require_nonzero(q[0], who);
            const ComplexBall s1 = div(q[1], q[0], work);
            const ComplexBall s2 = div(q[2], q[0], work);
            const ComplexBall mu1 = mean_good(BorchardtTerm::plain({exact_one(), s1}), p + guard);
            const ComplexBall mu2 = mean_good(BorchardtTerm::plain({exact_one(), s2}), p + guard);
            require_nonzero(mu2, who);
            const ComplexBall out = mul_i(div(mu1, mu2, work));
            if (out.radius() <= Dyadic::pow2(-p)) return out;
            if (attempt + 1 >= kMaxAttempts)
                throw PrecisionError("eval_F_g1const: radius target unreachable", p);
        } catch (const NotGoodPosition& e) {
            rethrow_as_basin(who, e);
        } catch (const DomainError& e) {
            rethrow_as_basin(who, e);
        } catch (const PrecisionError&) {
            if (attempt + 1 >= kMaxAttempts) throw;
        }
    }
}

std::array<ComplexBall, 2> eval_F_g1func(const std::array<ComplexBall, 2>& x, Precision p) {
    if (p < 8) throw std::invalid_argument("eval_F_g1func: target too small");
    const char* who = "eval_F_g1func";
    for (int attempt = 0;; ++attempt) {
        const Precision guard = 32L << attempt;
        const Precision work = p + guard + 160;
        try {
            const auto q =
                duplication_squared_quotients(SchemeVariant::kG1Func, {x[0], x[1]}, work);
            require_nonzero(q[0], who);
            require_nonzero(q[3], who);
            const ComplexBall s1 = div(q[1], q[0], work);
            const ComplexBall s2 = div(q[2], q[0], work);
            const ComplexBall u1 = div(q[4], q[3], work);
            const ComplexBall u2 = div(q[5], q[3], work);
            const ComplexBall one = exact_one();
            const ComplexBall mu1 = mean_good(BorchardtTerm::plain({one, s1}), p + guard);
            const ComplexBall mu2 = mean_good(BorchardtTerm::plain({one, s2}), p + guard);
            const ComplexBall lam1 = mean_ext_good(BorchardtTerm::extended({one, u1}, {one, s1}),
                                                   g1func_pack_base(), p + guard);
            const ComplexBall lam2 = mean_ext_good(BorchardtTerm::extended({one, u2}, {one, s2}),
                                                   g1func_pack_transported(), p + guard);
            require_nonzero(mu2, who);
            require_nonzero(lam2, who);
            const ComplexBall tau = mul_i(div(mu1, mu2, work));
            require_nonzero(tau, who);
            const ComplexBall w = div(mul_i(lam1), mul(tau, lam2, work), work);
            if (tau.radius() <= Dyadic::pow2(-p) && w.radius() <= Dyadic::pow2(-p))
                return {tau, w};
            if (attempt + 1 >= kMaxAttempts)
                throw PrecisionError("eval_F_g1func: radius target unreachable", p);
        } catch (const NotGoodPosition& e) {
            rethrow_as_basin(who, e);
        } catch (const DomainError& e) {
            rethrow_as_basin(who, e);
        } catch (const PrecisionError&) {
            if (attempt + 1 >= kMaxAttempts) throw;
        }
    }
}

std::array<ComplexBall, 3> eval_F_g2const(const std::array<ComplexBall, 3>& x, Precision p) {
    if (p < 8) throw std::invalid_argument("eval_F_g2const: target too small");
    const char* who = "eval_F_g2const";
    for (int attempt = 0;; ++attempt) {
        const Precision guard = 32L << attempt;
        const Precision work = p + guard + 160;
        try {
            const auto q =
                duplication_squared_quotients(SchemeVariant::kG2Const, {x[0], x[1], x[2]}, work);
            // Index map: 0 = 00|00, 1 = 00|01, 2 = 00|10, 3 = 00|11,
            // 4 = 01|00, 5 = 01|10, 6 = 10|00, 7 = 10|01, 8 = 11|00.
            require_nonzero(q[0], who);
            require_nonzero(q[4], who);
            require_nonzero(q[6], who);
            const ComplexBall one = exact_one();
            auto mean4 = [&](const ComplexBall& den, int i1, int i2, int i3) {
                return mean_good(BorchardtTerm::plain({one, div(q[i1], den, work),
                                                       div(q[i2], den, work),
                                                       div(q[i3], den, work)}),
                                 p + guard);
            };
            const ComplexBall mu_id = mean4(q[0], 1, 2, 3);
            const ComplexBall mu_m1 = mean4(q[6], 7, 0, 1);
            const ComplexBall mu_m2 = mean4(q[4], 0, 5, 2);
            const ComplexBall mu_n = mean4(q[0], 6, 4, 8);
            require_nonzero(mu_m1, who);
            require_nonzero(mu_m2, who);
            require_nonzero(mu_n, who);
            const ComplexBall base = mul(mu_id, q[0], work);
            const ComplexBall t11 = mul_i(div(base, mul(mu_m1, q[6], work), work));
            const ComplexBall t22 = mul_i(div(base, mul(mu_m2, q[4], work), work));
            const ComplexBall det = div(mu_id, mu_n, work);
            if (t11.radius() <= Dyadic::pow2(-p) && t22.radius() <= Dyadic::pow2(-p) &&
                det.radius() <= Dyadic::pow2(-p))
                return {t11, t22, det};
            if (attempt + 1 >= kMaxAttempts)
                throw PrecisionError("eval_F_g2const: radius target unreachable", p);
        } catch (const NotGoodPosition& e) {
            rethrow_as_basin(who, e);
        } catch (const DomainError& e) {
            rethrow_as_basin(who, e);
        } catch (const PrecisionError&) {
            if (attempt + 1 >= kMaxAttempts) throw;
        }
    }
}

EvaluatorContract scheme_contract(SchemeVariant variant) {
    EvaluatorContract c;
    c.r = scheme_descriptor(variant).r;
    switch (variant) {
        case SchemeVariant::kG1Const:
            c.eval = [](const std::vector<ComplexBall>& x, Precision n) {
                return std::vector<ComplexBall>{eval_F_g1const(x.at(0), n)};
            };
            break;
        case SchemeVariant::kG1Func:
            c.eval = [](const std::vector<ComplexBall>& x, Precision n) {
                const auto out = eval_F_g1func({x.at(0), x.at(1)}, n);
                return std::vector<ComplexBall>{out[0], out[1]};
            };
            break;
        case SchemeVariant::kG2Const:
            c.eval = [](const std::vector<ComplexBall>& x, Precision n) {
                const auto out = eval_F_g2const({x.at(0), x.at(1), x.at(2)}, n);
                return std::vector<ComplexBall>{out[0], out[1], out[2]};
            };
            break;
    }
    return c;
}

std::vector<ComplexBall> target_of(SchemeVariant variant, const PeriodPoint& p, Precision bits) {
    if (p.g != genus_of(variant))
        throw std::invalid_argument("target_of: point genus does not match the scheme");
    if (bits < 32) throw std::invalid_argument("target_of: want at least 32 bits");
    const Precision work = bits + 16;
    const PeriodPoint pm = p.midpoints();
    switch (variant) {
        case SchemeVariant::kG1Const:
            return {round_exact(pm.tau11, bits)};
        case SchemeVariant::kG1Func: {
            const ComplexBall tau = round_exact(pm.tau11, bits);
            const ComplexBall z = round_exact(pm.has_z ? pm.z1 : ComplexBall(), bits);
            const ComplexBall pr = mul(mul(z, z, work), pi_ball(work), work);
            const ComplexBall w = exp_ball(div(mul_i(mul_pow2(pr, 1)), tau, work), work);
            return {tau, round_exact(w, bits)};
        }
        case SchemeVariant::kG2Const: {
            const ComplexBall t11 = round_exact(pm.tau11, bits);
            const ComplexBall t12 = round_exact(pm.tau12, bits);
            const ComplexBall t22 = round_exact(pm.tau22, bits);
            // tau12^2 - tau11 tau22 in exact dyadic arithmetic, so the target
            // triple is the exact image of the exact rounded period matrix.
            return {t11, t22, exact_csub(exact_cmul(t12, t12), exact_cmul(t11, t22))};
        }
    }
    throw std::invalid_argument("unknown scheme variant");
}

ThetaQuotients solve_quotients(SchemeVariant variant, const PeriodPoint& p, Precision target,
                               std::vector<NewtonTraceEntry>* trace) {
    if (target < 1) throw std::invalid_argument("solve_quotients: target must be positive");
    const SchemeDescriptor& d = scheme_descriptor(variant);
    const Tristate dom = in_reduced_domain(variant, p);
    if (!is_true(dom))
        throw DomainError(is_false(dom)
                              ? "solve_quotients: point lies outside the reduced domain"
                              : "solve_quotients: input balls too wide to certify the reduced domain");
    const PeriodPoint pm = p.midpoints();
    const long lb3 = log2_pow2(d.constants.B3);
    const Precision nrun = target + lb3 + 2;

    const auto z0 = target_of(variant, pm, nrun + 32);
    std::vector<ComplexBall> x0 = naive_quotients(variant, pm, d.seed_bits + 24);
    for (auto& xi : x0) xi = round_exact(xi, d.seed_bits + 16);

    const auto refined = newton_refine(scheme_contract(variant), d.constants, z0, x0, nrun, trace);

    // The refinement certifies target + 1 bits against the rounded dyadic
    // point; the rounding displacement itself is far below target + 4.
    const Dyadic rad = Dyadic::pow2(-(target + 1)) + Dyadic::pow2(-(target + 4));
    ThetaQuotients out;
    out.values.reserve(refined.size());
    for (const auto& v : refined)
        out.values.push_back(ComplexBall(v.re_mid(), v.im_mid(), rad));
    return out;
}

std::vector<std::pair<Characteristic, ComplexBall>> quotients_to_squared_thetas(
    SchemeVariant variant, const ThetaQuotients& q, const PeriodPoint& p, Precision target) {
    const SchemeDescriptor& d = scheme_descriptor(variant);
    if (q.values.size() != static_cast<size_t>(d.r))
        throw std::invalid_argument("quotients_to_squared_thetas: wrong quotient count");
    if (target < 8) throw std::invalid_argument("quotients_to_squared_thetas: target too small");
    const long lb3 = log2_pow2(d.constants.B3);
    const Dyadic need = Dyadic::pow2(-(target + 96 + lb3));
    for (const auto& v : q.values)
        if (v.radius() > need)
            throw PrecisionError("quotients_to_squared_thetas: quotients not certified finely enough",
                                 target);

    // Cheap consistency check: the quotients must agree coarsely with the
    // series values at the point, otherwise the caller mixed up arguments.
    const auto coarse = naive_quotients(variant, p.midpoints(), 32);
    for (size_t i = 0; i < coarse.size(); ++i)
        if (sub(q.values[i], coarse[i], 64).abs_lower() > Dyadic::pow2(-8))
            throw DomainError("quotients_to_squared_thetas: quotients do not match the point");

    const Precision mt = target + 24;
    const Precision work = mt + 160;
    const ComplexBall one = exact_one();
    std::vector<std::pair<Characteristic, ComplexBall>> out;
    switch (variant) {
        case SchemeVariant::kG1Const: {
            const auto dup = duplication_squared_quotients(variant, q.values, work);
            require_nonzero(dup[0], "theta_00^2 duplication value");
            const ComplexBall s1 = div(dup[1], dup[0], work);
            const ComplexBall mu = mean_good(BorchardtTerm::plain({one, s1}), mt);
            const ComplexBall th00 = recip(mu, work);
            out.emplace_back(Characteristic::g1(0, 0), th00);
            out.emplace_back(Characteristic::g1(0, 1), mul(s1, th00, work));
            out.emplace_back(Characteristic::g1(1, 0),
                             mul(div(dup[2], dup[0], work), th00, work));
            out.emplace_back(Characteristic::g1(1, 1), ComplexBall());
            return out;
        }
        case SchemeVariant::kG1Func: {
            const auto dup = duplication_squared_quotients(variant, q.values, work);
            require_nonzero(dup[0], "theta_00^2 duplication value");
            require_nonzero(dup[3], "theta_00^2(z) duplication value");
            const ComplexBall s1 = div(dup[1], dup[0], work);
            const ComplexBall u1 = div(dup[4], dup[3], work);
            const ComplexBall u2 = div(dup[5], dup[3], work);
            const ComplexBall u3 = div(dup[6], dup[3], work);
            const ComplexBall lam = mean_ext_good(BorchardtTerm::extended({one, u1}, {one, s1}),
                                                  g1func_pack_base(), mt);
            const ComplexBall th00 = recip(lam, work);
            out.emplace_back(Characteristic::g1(0, 0), th00);
            out.emplace_back(Characteristic::g1(0, 1), mul(u1, th00, work));
            out.emplace_back(Characteristic::g1(1, 0), mul(u2, th00, work));
            out.emplace_back(Characteristic::g1(1, 1), mul(u3, th00, work));
            return out;
        }
        case SchemeVariant::kG2Const: {
            const auto dup = duplication_squared_quotients(variant, q.values, work);
            require_nonzero(dup[0], "theta_0000^2 duplication value");
            const ComplexBall mu =
                mean_good(BorchardtTerm::plain({one, div(dup[1], dup[0], work),
                                                div(dup[2], dup[0], work),
                                                div(dup[3], dup[0], work)}),
                          mt);
            const ComplexBall th00 = recip(mu, work);
            // theta_00^2(0, tau/2), the common normalizer of the dup values.
            const ComplexBall den = div(th00, dup[0], work);
            for (int i = 0; i < 10; ++i)
                out.emplace_back(even_g2_char(i), mul(dup[i], den, work));
            return out;
        }
    }
    throw std::invalid_argument("unknown scheme variant");
}

// ---------------------------------------------------------------------------
// Jacobian audit

namespace {

// G for the constants scheme: the input quotient as a function of tau.
ComplexBall g_map_g1const(const ComplexBall& tau, Precision n) {
    PeriodPoint pm = PeriodPoint::constants_g1(tau);
    return naive_quotients(SchemeVariant::kG1Const, pm, n)[0];
}

// G for the function scheme, from target coordinates (tau, w):
// z^2 = tau log(w) / (2 pi i), thetas are even in z so either root works.
std::array<ComplexBall, 2> g_map_g1func(const ComplexBall& tau, const ComplexBall& w,
                                        Precision n) {
    const Precision wk = n + 16;
    const ComplexBall num = mul(tau, log_ball(w, wk), wk);
    const ComplexBall y = mul_pow2(-mul_i(div(num, pi_ball(wk), wk)), -1);
    const ComplexBall z = sqrt_principal(y, wk);
    PeriodPoint pm = PeriodPoint::functions_g1(z, tau);
    const auto qs = naive_quotients(SchemeVariant::kG1Func, pm, n);
    return {qs[0], qs[1]};
}

// G for the genus-2 scheme, from target coordinates
// (t1, t2, t3) = (tau11, tau22, tau12^2 - tau11 tau22). Theta constants are
// even in tau12, so either square root gives the same quotients; when the
// ball straddles zero a disk enclosure of both roots is used.
std::array<ComplexBall, 3> g_map_g2const(const ComplexBall& t1, const ComplexBall& t2,
                                         const ComplexBall& t3, Precision n) {
    const Precision wk = n + 16;
    // The probe points are exact dyadics, and tau12^2 must come out exact
    // when it vanishes (a rounded zero would blow up under the square root
    // fallback below), so s is computed without rounding when possible.
    ComplexBall s;
    if (t1.is_exact() && t2.is_exact() && t3.is_exact()) {
        s = exact_csub(t3, -exact_cmul(t1, t2));
    } else {
        s = add(t3, mul(t1, t2, 2 * n + 48), 2 * n + 48);
    }
    ComplexBall t12;
    if (s.excludes_zero()) {
        t12 = sqrt_principal(s, wk);
    } else {
        t12 = ComplexBall(Dyadic(), Dyadic(), rnd::sqrt_up(s.abs_upper()));
    }
    PeriodPoint pm = PeriodPoint::constants_g2(t1, t12, t2);
    const auto qs = naive_quotients(SchemeVariant::kG2Const, pm, n);
    return {qs[0], qs[1], qs[2]};
}

Dyadic fd_norm_upper(const std::vector<std::vector<ComplexBall>>& cols, long m) {
    // max over output rows of the sum over columns of |difference| * 2^m.
    size_t rows = cols[0].size();
    Dyadic best;
    for (size_t i = 0; i < rows; ++i) {
        Dyadic acc;
        for (const auto& col : cols) acc = rnd::add_up(acc, col[i].abs_upper());
        acc = acc.mul_pow2(m);
        if (acc > best) best = acc;
    }
    return best;
}

}  // namespace

std::vector<JacobianSample> jacobian_bound_check(SchemeVariant variant,
                                                 const std::vector<PeriodPoint>& samples) {
    constexpr long kEtaLog2 = -20;
    constexpr Precision kBits = 96;
    const Dyadic eta = Dyadic::pow2(kEtaLog2);
    const Dyadic bound = scheme_descriptor(variant).constants.B3;
    std::vector<JacobianSample> out;
    out.reserve(samples.size());
    for (const auto& sample : samples) {
        const auto t = target_of(variant, sample, kBits + 16);
        std::vector<std::vector<ComplexBall>> cols;
        switch (variant) {
            case SchemeVariant::kG1Const: {
                const ComplexBall base = g_map_g1const(t[0], kBits);
                const ComplexBall shift =
                    g_map_g1const(ComplexBall(t[0].re_mid() + eta, t[0].im_mid()), kBits);
                cols.push_back({sub(shift, base, kBits)});
                break;
            }
            case SchemeVariant::kG1Func: {
                const auto base = g_map_g1func(t[0], t[1], kBits);
                const auto s0 =
                    g_map_g1func(ComplexBall(t[0].re_mid() + eta, t[0].im_mid()), t[1], kBits);
                const auto s1 =
                    g_map_g1func(t[0], ComplexBall(t[1].re_mid() + eta, t[1].im_mid()), kBits);
                cols.push_back({sub(s0[0], base[0], kBits), sub(s0[1], base[1], kBits)});
                cols.push_back({sub(s1[0], base[0], kBits), sub(s1[1], base[1], kBits)});
                break;
            }
            case SchemeVariant::kG2Const: {
                const auto base = g_map_g2const(t[0], t[1], t[2], kBits);
                const std::array<ComplexBall, 3> probes[3] = {
                    g_map_g2const(ComplexBall(t[0].re_mid() + eta, t[0].im_mid()), t[1], t[2],
                                  kBits),
                    g_map_g2const(t[0], ComplexBall(t[1].re_mid() + eta, t[1].im_mid()), t[2],
                                  kBits),
                    g_map_g2const(t[0], t[1], ComplexBall(t[2].re_mid() + eta, t[2].im_mid()),
                                  kBits),
                };
                for (const auto& pr : probes) {
                    cols.push_back({sub(pr[0], base[0], kBits), sub(pr[1], base[1], kBits),
                                    sub(pr[2], base[2], kBits)});
                }
                break;
            }
        }
        JacobianSample js;
        js.estimate = fd_norm_upper(cols, -kEtaLog2);
        js.bound = bound;
        js.pass = js.estimate <= js.bound;
        out.push_back(js);
    }
    return out;
}

std::string scheme_constants_json() {
    nlohmann::json root;
    for (SchemeVariant v :
         {SchemeVariant::kG1Const, SchemeVariant::kG1Func, SchemeVariant::kG2Const}) {
        const SchemeDescriptor& d = scheme_descriptor(v);
        nlohmann::json j;
        j["r"] = d.r;
        j["rho"] = d.constants.rho.to_hex();
        j["M"] = d.constants.M.to_hex();
        j["B1"] = d.constants.B1.to_hex();
        j["B2"] = d.constants.B2.to_hex();
        j["B3"] = d.constants.B3.to_hex();
        j["start_bits"] = d.constants.n0;
        switch (v) {
            case SchemeVariant::kG1Const:
                j["borchardt_brackets"] = {
                    {{"mean", "base"}, {"lower", "0.56"}, {"upper", "1.7"}},
                    {{"mean", "transported"}, {"lower", "0.13"}, {"upper", "1.38"}},
                };
                break;
            case SchemeVariant::kG1Func: {
                auto pack_json = [](const BorchardtBounds& b, const char* mlo, const char* mhi,
                                    const char* minf) {
                    return nlohmann::json{{"M0", b.M0.to_hex()},
                                          {"m_inf", b.m_inf.to_hex()},
                                          {"certified_upper", mhi},
                                          {"certified_head_lower", mlo},
                                          {"certified_tail_lower", minf}};
                };
                j["extended_bounds"] = {
                    {{"mean", "base"}, {"pack", pack_json(g1func_pack_base(), "0.51", "1.94", "0.72")}},
                    {{"mean", "transported"},
                     {"pack", pack_json(g1func_pack_transported(), "0.1", "1.69", "0.51")}},
                };
                break;
            }
            case SchemeVariant::kG2Const:
                // Unlike the extended-mean packs above these are not inputs
                // to any algorithm; the plain means verify good position at
                // runtime. The ranges were measured on an audit grid that
                // includes the cell corners, where the m1/m2 tuples grow
                // like exp(pi Im tau22 / 2) as theta_0100 decays.
                j["observed_start_ranges"] = {
                    {{"mean", "base"}, {"lower", "0.05"}, {"upper", "1.1"}},
                    {{"mean", "m1"}, {"lower", "1e-7"}, {"upper", "1e6"}},
                    {{"mean", "m2"}, {"lower", "1e-7"}, {"upper", "1e6"}},
                    {{"mean", "n12"}, {"lower", "1e-9"}, {"upper", "1.5"}},
                };
                j["transport"] = {
                    {{"matrix", "m1"},
                     {"denominator", "10|00"},
                     {"b01", "10|01"},
                     {"b10", "00|00"},
                     {"b11", "00|01"}},
                    {{"matrix", "m2"},
                     {"denominator", "01|00"},
                     {"b01", "00|00"},
                     {"b10", "01|10"},
                     {"b11", "00|10"}},
                    {{"matrix", "n12"},
                     {"denominator", "00|00"},
                     {"b01", "10|00"},
                     {"b10", "01|00"},
                     {"b11", "11|00"}},
                };
                j["feedback"] = {
                    {"m1", "theta_0000^2(0, M1 tau) = -i tau11 theta_1000^2(0, tau)"},
                    {"m2", "theta_0000^2(0, M2 tau) = -i tau22 theta_0100^2(0, tau)"},
                    {"n12", "theta_0000^2(0, N12 tau) = (tau12^2 - tau11 tau22) theta_0000^2(0, tau)"},
                };
                break;
        }
        root[variant_name(v)] = std::move(j);
    }
    return root.dump(2);
}

}  // namespace ctheta

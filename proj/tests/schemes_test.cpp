// Tests for the three Newton schemes: exact duplication tables against
// hand-computed values, containment of every derived quantity in naive
// series enclosures (including the transported tuples, checked against
// independently computed modular images), end-to-end F evaluations and
// quotient solves, the reduced-domain predicates, and the hard-wired
// constant audits on small grids.

#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "ctheta/borchardt.hpp"
#include "ctheta/errors.hpp"
#include "ctheta/schemes.hpp"
#include "ctheta/serialize.hpp"
#include "ctheta/theta_naive.hpp"

using namespace ctheta;

namespace {

ComplexBall exact(long re, long im = 0) { return ComplexBall(Dyadic(re), Dyadic(im)); }

ComplexBall theta_sq(const Characteristic& ch, const PeriodPoint& p, Precision bits) {
    const ComplexBall t = theta_naive(ch, p, bits);
    return mul(t, t, bits + 8);
}

// Squared theta quotient theta_{0,b}^2 / theta_{0,0}^2 at a point, from the
// series evaluator.
ComplexBall sq_quotient_g1(int b, const PeriodPoint& p, Precision bits) {
    return div(theta_sq(Characteristic::g1(0, b), p, bits),
               theta_sq(Characteristic::g1(0, 0), p, bits), bits + 8);
}

ComplexBall sq_quotient_g2(int b1, int b2, const PeriodPoint& p, Precision bits) {
    return div(theta_sq(Characteristic::g2(0, 0, b1, b2), p, bits),
               theta_sq(Characteristic::g2(0, 0, 0, 0), p, bits), bits + 8);
}

// Plain (unsquared) quotients at half the period matrix, the scheme inputs.
std::vector<ComplexBall> inputs_g1const(const ComplexBall& tau, Precision bits) {
    const PeriodPoint ph = PeriodPoint::constants_g1(mul_pow2(tau, -1));
    return {div(theta_naive(Characteristic::g1(0, 1), ph, bits),
                theta_naive(Characteristic::g1(0, 0), ph, bits), bits)};
}

std::vector<ComplexBall> inputs_g1func(const ComplexBall& z, const ComplexBall& tau,
                                       Precision bits) {
    auto out = inputs_g1const(tau, bits);
    const PeriodPoint pf = PeriodPoint::functions_g1(z, mul_pow2(tau, -1));
    out.push_back(div(theta_naive(Characteristic::g1(0, 1), pf, bits),
                      theta_naive(Characteristic::g1(0, 0), pf, bits), bits));
    return out;
}

std::vector<ComplexBall> inputs_g2const(const PeriodPoint& p, Precision bits) {
    const PeriodPoint ph = PeriodPoint::constants_g2(
        mul_pow2(p.tau11, -1), mul_pow2(p.tau12, -1), mul_pow2(p.tau22, -1));
    const ComplexBall t0 = theta_naive(Characteristic::g2(0, 0, 0, 0), ph, bits);
    return {div(theta_naive(Characteristic::g2(0, 0, 0, 1), ph, bits), t0, bits),
            div(theta_naive(Characteristic::g2(0, 0, 1, 0), ph, bits), t0, bits),
            div(theta_naive(Characteristic::g2(0, 0, 1, 1), ph, bits), t0, bits)};
}

PeriodPoint sample_g2_a(Precision bits) {
    return PeriodPoint::constants_g2(ball_from_decimal("0.1", "1.1", bits),
                                     ball_from_decimal("0.05", "0.2", bits),
                                     ball_from_decimal("0.15", "1.4", bits));
}

PeriodPoint sample_g2_b(Precision bits) {
    return PeriodPoint::constants_g2(ball_from_decimal("-0.3", "1.05", bits),
                                     ball_from_decimal("-0.1", "-0.15", bits),
                                     ball_from_decimal("0.45", "2.5", bits));
}

// 2x2 complex ball matrices, enough to apply integer symplectic matrices to
// a period matrix: tau' = (A tau + B)(C tau + D)^{-1}.
struct BallMat2 {
    ComplexBall a, b, c, d;
};

struct IntMat2 {
    long m[4];
};

BallMat2 int_affine(const IntMat2& A, const BallMat2& T, const IntMat2& B, Precision w) {
    auto lin = [&](long a0, long a1, const ComplexBall& x, const ComplexBall& y, long cst) {
        return add(add(mul_si(x, a0, w), mul_si(y, a1, w), w), exact(cst), w);
    };
    BallMat2 R;
    R.a = lin(A.m[0], A.m[1], T.a, T.c, B.m[0]);
    R.b = lin(A.m[0], A.m[1], T.b, T.d, B.m[1]);
    R.c = lin(A.m[2], A.m[3], T.a, T.c, B.m[2]);
    R.d = lin(A.m[2], A.m[3], T.b, T.d, B.m[3]);
    return R;
}

BallMat2 mat_mul(const BallMat2& X, const BallMat2& Y, Precision w) {
    BallMat2 R;
    R.a = add(mul(X.a, Y.a, w), mul(X.b, Y.c, w), w);
    R.b = add(mul(X.a, Y.b, w), mul(X.b, Y.d, w), w);
    R.c = add(mul(X.c, Y.a, w), mul(X.d, Y.c, w), w);
    R.d = add(mul(X.c, Y.b, w), mul(X.d, Y.d, w), w);
    return R;
}

BallMat2 mat_inv(const BallMat2& X, Precision w) {
    const ComplexBall det = sub(mul(X.a, X.d, w), mul(X.b, X.c, w), w);
    REQUIRE(det.excludes_zero());
    BallMat2 R;
    R.a = div(X.d, det, w);
    R.b = div(-X.b, det, w);
    R.c = div(-X.c, det, w);
    R.d = div(X.a, det, w);
    return R;
}

struct SymplecticAction {
    IntMat2 A, B, C, D;
};

// The three expansion matrices of the genus-2 scheme.
const SymplecticAction kM1 = {{-1, 0, 0, -1}, {-1, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, -1}};
const SymplecticAction kM2 = {{-1, 0, 0, -1}, {0, 0, 0, -1}, {0, 0, 0, 1}, {-1, 0, 0, 0}};
const SymplecticAction kN12 = {{-1, 0, 0, -1}, {0, -1, -1, 0}, {0, 1, 1, 0}, {0, 0, 0, 0}};

PeriodPoint apply_action(const SymplecticAction& s, const PeriodPoint& p, Precision w) {
    const BallMat2 T = {p.tau11, p.tau12, p.tau12, p.tau22};
    const BallMat2 num = int_affine(s.A, T, s.B, w);
    const BallMat2 den = int_affine(s.C, T, s.D, w);
    const BallMat2 R = mat_mul(num, mat_inv(den, w), w);
    return PeriodPoint::constants_g2(R.a, R.b, R.d);
}

}  // namespace

TEST_CASE("reduced domain membership") {
    SUBCASE("genus-1 fundamental strip") {
        CHECK(in_reduced_domain(SchemeVariant::kG1Const,
                                PeriodPoint::constants_g1(exact(0, 1))) == Tristate::kTrue);
        // Closed boundaries decide for exact inputs.
        CHECK(in_reduced_domain(
                  SchemeVariant::kG1Const,
                  PeriodPoint::constants_g1(ComplexBall(Dyadic(1).mul_pow2(-1), Dyadic(1)))) ==
              Tristate::kTrue);
        CHECK(in_reduced_domain(SchemeVariant::kG1Const,
                                PeriodPoint::constants_g1(exact(0, 3))) == Tristate::kFalse);
        CHECK(in_reduced_domain(SchemeVariant::kG1Const,
                                PeriodPoint::constants_g1(ball_from_decimal("0.6", "1.2", 64))) ==
              Tristate::kFalse);
        CHECK(in_reduced_domain(SchemeVariant::kG1Const,
                                PeriodPoint::constants_g1(ball_from_decimal("0", "0.9", 64))) ==
              Tristate::kFalse);
        // A fat ball over the |tau| = 1 boundary cannot be decided.
        CHECK(in_reduced_domain(SchemeVariant::kG1Const,
                                PeriodPoint::constants_g1(ComplexBall(
                                    Dyadic(), Dyadic(1), Dyadic::pow2(-10)))) ==
              Tristate::kIndeterminate);
        CHECK_THROWS_AS(in_reduced_domain(SchemeVariant::kG1Const,
                                          PeriodPoint::functions_g1(exact(0), exact(0, 1))),
                        std::invalid_argument);
        CHECK_THROWS_AS(in_reduced_domain(SchemeVariant::kG1Const, sample_g2_a(64)),
                        std::invalid_argument);
    }
    SUBCASE("genus-1 function domain ties z to Im tau") {
        const ComplexBall tau = exact(0, 1);
        const ComplexBall corner(Dyadic(1).mul_pow2(-3), Dyadic(1).mul_pow2(-3));
        CHECK(in_reduced_domain(SchemeVariant::kG1Func,
                                PeriodPoint::functions_g1(corner, tau)) == Tristate::kTrue);
        CHECK(in_reduced_domain(SchemeVariant::kG1Func,
                                PeriodPoint::functions_g1(ball_from_decimal("0.2", "0", 64),
                                                          tau)) == Tristate::kFalse);
        CHECK(in_reduced_domain(SchemeVariant::kG1Func,
                                PeriodPoint::functions_g1(
                                    ComplexBall(Dyadic(), Dyadic(1).mul_pow2(-2)), tau)) ==
              Tristate::kFalse);
        // Constants points act as z = 0.
        CHECK(in_reduced_domain(SchemeVariant::kG1Func, PeriodPoint::constants_g1(tau)) ==
              Tristate::kTrue);
    }
    SUBCASE("genus-2 Minkowski-style cell") {
        CHECK(in_reduced_domain(SchemeVariant::kG2Const, sample_g2_a(128)) == Tristate::kTrue);
        CHECK(in_reduced_domain(SchemeVariant::kG2Const, sample_g2_b(128)) == Tristate::kTrue);
        // Im tau11 > Im tau22 breaks the ordering.
        CHECK(in_reduced_domain(SchemeVariant::kG2Const,
                                PeriodPoint::constants_g2(exact(0, 2), exact(0), exact(0, 1))) ==
              Tristate::kFalse);
        // Off-diagonal too large: 2 Im tau12 > Im tau11.
        CHECK(in_reduced_domain(SchemeVariant::kG2Const,
                                PeriodPoint::constants_g2(exact(0, 1), exact(0, 1),
                								  exact(0, 2))) == Tristate::kFalse);
        CHECK(in_reduced_domain(SchemeVariant::kG2Const,
                                PeriodPoint::constants_g2(exact(0, 1), exact(0), exact(0, 9))) ==
              Tristate::kFalse);
        CHECK_THROWS_AS(in_reduced_domain(SchemeVariant::kG2Const,
                                          PeriodPoint::functions_g2(exact(0), exact(0),
                                                                    exact(0, 1), exact(0),
                                                                    exact(0, 2))),
                        std::invalid_argument);
    }
}

TEST_CASE("scheme descriptors freeze the Newton bundles") {
    const SchemeDescriptor& c1 = scheme_descriptor(SchemeVariant::kG1Const);
    CHECK(c1.r == 1);
    CHECK(c1.constants.n0 == 58);
    CHECK(c1.constants.n0 <= 60);
    CHECK(c1.constants.B3 == Dyadic::pow2(7));
    const SchemeDescriptor& f1 = scheme_descriptor(SchemeVariant::kG1Func);
    CHECK(f1.r == 2);
    CHECK(f1.constants.n0 == 1548);
    CHECK(f1.constants.n0 <= 1600);
    CHECK(f1.constants.B3 == Dyadic::pow2(17));
    const SchemeDescriptor& c2 = scheme_descriptor(SchemeVariant::kG2Const);
    CHECK(c2.r == 3);
    CHECK(c2.constants.n0 == 222);
    CHECK(c2.constants.n0 <= 300);
    CHECK(c2.constants.B3 == Dyadic::pow2(14));
    for (const SchemeDescriptor* d : {&c1, &f1, &c2}) {
        CHECK_NOTHROW(d->constants.validate());
        CHECK(d->seed_bits == d->constants.n0);
    }
}

TEST_CASE("duplication tables on exact rational inputs") {
    SUBCASE("genus 1 constants") {
        const auto q = duplication_squared_quotients(SchemeVariant::kG1Const,
                                                     {ComplexBall(Dyadic(1).mul_pow2(-1))}, 64);
        REQUIRE(q.size() == 3);
        for (const auto& v : q) CHECK(v.is_exact());
        CHECK(q[0].re_mid() == Dyadic(5, -3));
        CHECK(q[1].re_mid() == Dyadic(1, -1));
        CHECK(q[2].re_mid() == Dyadic(3, -3));
    }
    SUBCASE("genus 1 functions") {
        const auto q = duplication_squared_quotients(
            SchemeVariant::kG1Func,
            {ComplexBall(Dyadic(1).mul_pow2(-1)), ComplexBall(Dyadic(1).mul_pow2(-2))}, 64);
        REQUIRE(q.size() == 7);
        CHECK(q[3].re_mid() == Dyadic(9, -4));
        CHECK(q[4].re_mid() == Dyadic(3, -3));
        CHECK(q[5].re_mid() == Dyadic(7, -4));
        CHECK(q[6].re_mid() == Dyadic(-1, -3));
    }
    SUBCASE("genus 2 sign table") {
        const auto q = duplication_squared_quotients(SchemeVariant::kG2Const,
                                                     {exact(3), exact(5), exact(7)}, 64);
        REQUIRE(q.size() == 10);
        const long want[10] = {21, 19, 13, 11, -8, -8, -16, -16, 4, -4};
        for (int i = 0; i < 10; ++i) {
            CHECK(q[i].is_exact());
            CHECK(q[i].re_mid() == Dyadic(want[i]));
            CHECK(q[i].im_mid().is_zero());
        }
    }
    SUBCASE("input arity is enforced") {
        CHECK_THROWS_AS(
            duplication_squared_quotients(SchemeVariant::kG1Const, {exact(1), exact(1)}, 64),
            std::invalid_argument);
        CHECK_THROWS_AS(duplication_squared_quotients(SchemeVariant::kG2Const, {exact(1)}, 64),
                        std::invalid_argument);
    }
}

TEST_CASE("duplication step lands on squared quotients at tau") {
    const Precision bits = 160;
    SUBCASE("genus 1, with and without z") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", bits + 40);
        const ComplexBall z = ball_from_decimal("0.0625", "0.125", bits + 40);
        const auto x = inputs_g1func(z, tau, bits);
        const auto q = duplication_squared_quotients(SchemeVariant::kG1Func, x, bits);
        const PeriodPoint pc = PeriodPoint::constants_g1(tau);
        const PeriodPoint pf = PeriodPoint::functions_g1(z, tau);
        const PeriodPoint ph = PeriodPoint::constants_g1(mul_pow2(tau, -1));
        const PeriodPoint phz = PeriodPoint::functions_g1(z, mul_pow2(tau, -1));
        const ComplexBall d0 = theta_sq(Characteristic::g1(0, 0), ph, bits);
        const ComplexBall ez = mul(theta_naive(Characteristic::g1(0, 0), phz, bits),
                                   theta_naive(Characteristic::g1(0, 0), ph, bits), bits);
        const int ab[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        for (int k = 0; k < 3; ++k) {
            const ComplexBall ref =
                div(theta_sq(Characteristic::g1(ab[k][0], ab[k][1]), pc, bits), d0, bits);
            CAPTURE(k);
            CHECK(q[k].overlaps(ref));
        }
        for (int k = 0; k < 4; ++k) {
            const ComplexBall ref =
                div(theta_sq(Characteristic::g1(ab[k][0], ab[k][1]), pf, bits), ez, bits);
            CAPTURE(k);
            CHECK(q[3 + k].overlaps(ref));
        }
    }
    SUBCASE("genus 2, all ten even characteristics at two points") {
        for (const PeriodPoint& p : {sample_g2_a(bits + 40), sample_g2_b(bits + 40)}) {
            const auto x = inputs_g2const(p, bits);
            const auto q = duplication_squared_quotients(SchemeVariant::kG2Const, x, bits);
            const PeriodPoint ph = PeriodPoint::constants_g2(
                mul_pow2(p.tau11, -1), mul_pow2(p.tau12, -1), mul_pow2(p.tau22, -1));
            const ComplexBall d0 = theta_sq(Characteristic::g2(0, 0, 0, 0), ph, bits);
            // Recover which characteristic each slot holds from the solver's
            // own output contract.
            ThetaQuotients tq;
            tq.values = x;
            int idx = 0;
            const int order[10][4] = {{0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}, {0, 0, 1, 1},
                                      {0, 1, 0, 0}, {0, 1, 1, 0}, {1, 0, 0, 0}, {1, 0, 0, 1},
                                      {1, 1, 0, 0}, {1, 1, 1, 1}};
            for (const auto& o : order) {
                const Characteristic ch = Characteristic::g2(o[0], o[1], o[2], o[3]);
                const ComplexBall ref = div(theta_sq(ch, p, bits), d0, bits);
                CAPTURE(idx);
                CHECK(q[idx].overlaps(ref));
                ++idx;
            }
        }
    }
}

TEST_CASE("one good Borchardt step tracks theta duplication") {
    const Precision bits = 120;
    SUBCASE("genus 1") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", bits + 40);
        const auto x = inputs_g1const(tau, bits);
        const auto q = duplication_squared_quotients(SchemeVariant::kG1Const, x, bits);
        BorchardtTerm term = BorchardtTerm::plain(
            {exact(1), div(q[1], q[0], bits)});
        const PeriodPoint p2 = PeriodPoint::constants_g1(mul_pow2(tau, 1));
        const PeriodPoint p4 = PeriodPoint::constants_g1(mul_pow2(tau, 2));
        term = step_good(term, bits).first;
        CHECK(div(term.s[1], term.s[0], bits).overlaps(sq_quotient_g1(1, p2, bits)));
        term = step_good(term, bits).first;
        CHECK(div(term.s[1], term.s[0], bits).overlaps(sq_quotient_g1(1, p4, bits)));
    }
    SUBCASE("genus 2") {
        const PeriodPoint p = sample_g2_a(bits + 40);
        const auto x = inputs_g2const(p, bits);
        const auto q = duplication_squared_quotients(SchemeVariant::kG2Const, x, bits);
        BorchardtTerm term = BorchardtTerm::plain({exact(1), div(q[1], q[0], bits),
                                                   div(q[2], q[0], bits),
                                                   div(q[3], q[0], bits)});
        const PeriodPoint p2 = PeriodPoint::constants_g2(
            mul_pow2(p.tau11, 1), mul_pow2(p.tau12, 1), mul_pow2(p.tau22, 1));
        term = step_good(term, bits).first;
        CHECK(div(term.s[1], term.s[0], bits).overlaps(sq_quotient_g2(0, 1, p2, bits)));
        CHECK(div(term.s[2], term.s[0], bits).overlaps(sq_quotient_g2(1, 0, p2, bits)));
        CHECK(div(term.s[3], term.s[0], bits).overlaps(sq_quotient_g2(1, 1, p2, bits)));
    }
}

TEST_CASE("transported tuples match the modular images") {
    const Precision bits = 96;
    const PeriodPoint p = sample_g2_a(bits + 60);
    const auto x = inputs_g2const(p, bits + 30);
    const auto q = duplication_squared_quotients(SchemeVariant::kG2Const, x, bits + 30);
    // Slot table: numerators for b = 01, 10, 11 over the denominator slot.
    struct Row {
        const SymplecticAction* act;
        int den;
        int num[3];
    };
    const Row rows[3] = {
        {&kM1, 6, {7, 0, 1}},
        {&kM2, 4, {0, 5, 2}},
        {&kN12, 0, {6, 4, 8}},
    };
    for (const Row& row : rows) {
        const PeriodPoint image = apply_action(*row.act, p, bits + 30);
        CAPTURE(row.den);
        const int bpairs[3][2] = {{0, 1}, {1, 0}, {1, 1}};
        for (int k = 0; k < 3; ++k) {
            const ComplexBall got = div(q[row.num[k]], q[row.den], bits);
            const ComplexBall ref = sq_quotient_g2(bpairs[k][0], bpairs[k][1], image, bits);
            CAPTURE(k);
            CHECK(got.overlaps(ref));
        }
    }
}

TEST_CASE("modular feedback identities behind the genus-2 scheme") {
    const Precision bits = 96;
    for (const PeriodPoint& p : {sample_g2_a(bits + 60), sample_g2_b(bits + 60)}) {
        const ComplexBall th00_m1 =
            theta_sq(Characteristic::g2(0, 0, 0, 0), apply_action(kM1, p, bits + 30), bits);
        const ComplexBall th00_m2 =
            theta_sq(Characteristic::g2(0, 0, 0, 0), apply_action(kM2, p, bits + 30), bits);
        const ComplexBall th00_n =
            theta_sq(Characteristic::g2(0, 0, 0, 0), apply_action(kN12, p, bits + 30), bits);
        // theta_0000^2(M1 tau) = -i tau11 theta_1000^2(tau), and M2 likewise
        // with tau22 and theta_0100^2.
        const ComplexBall rhs1 =
            -mul_i(mul(p.tau11, theta_sq(Characteristic::g2(1, 0, 0, 0), p, bits), bits));
        const ComplexBall rhs2 =
            -mul_i(mul(p.tau22, theta_sq(Characteristic::g2(0, 1, 0, 0), p, bits), bits));
        CHECK(th00_m1.overlaps(rhs1));
        CHECK(th00_m2.overlaps(rhs2));
        // theta_0000^2(N12 tau) = (tau12^2 - tau11 tau22) theta_0000^2(tau).
        const ComplexBall fac =
            sub(mul(p.tau12, p.tau12, bits), mul(p.tau11, p.tau22, bits), bits);
        CHECK(th00_n.overlaps(mul(fac, theta_sq(Characteristic::g2(0, 0, 0, 0), p, bits), bits)));
    }
}

TEST_CASE("Borchardt means recover reciprocal squared thetas") {
    const Precision bits = 200;
    const ComplexBall tau = ball_from_decimal("0.25", "1.3", bits + 40);
    const ComplexBall z = ball_from_decimal("0.0625", "0.125", bits + 40);
    const auto x = inputs_g1func(z, tau, bits);
    const auto q = duplication_squared_quotients(SchemeVariant::kG1Func, x, bits);
    const ComplexBall one = exact(1);
    const ComplexBall s1 = div(q[1], q[0], bits);
    const ComplexBall s2 = div(q[2], q[0], bits);
    const ComplexBall u1 = div(q[4], q[3], bits);
    const ComplexBall u2 = div(q[5], q[3], bits);
    SUBCASE("plain means at tau and at -1/tau") {
        const ComplexBall mu1 = mean_good(BorchardtTerm::plain({one, s1}), 80);
        CHECK(mu1.overlaps(recip(theta_sq(Characteristic::g1(0, 0),
                                          PeriodPoint::constants_g1(tau), bits), bits)));
        const ComplexBall mu2 = mean_good(BorchardtTerm::plain({one, s2}), 80);
        const ComplexBall minus_inv = -recip(tau, bits);
        CHECK(mu2.overlaps(recip(theta_sq(Characteristic::g1(0, 0),
                                          PeriodPoint::constants_g1(minus_inv), bits), bits)));
    }
    SUBCASE("extended means at (z, tau) and its inversion image") {
        BorchardtBounds pack1;
        pack1.M0 = Dyadic(2);
        pack1.m_inf = Dyadic(1).mul_pow2(-1);
        const ComplexBall lam1 =
            mean_ext_good(BorchardtTerm::extended({one, u1}, {one, s1}), pack1, 80);
        CHECK(lam1.overlaps(recip(theta_sq(Characteristic::g1(0, 0),
                                           PeriodPoint::functions_g1(z, tau), bits), bits)));
        BorchardtBounds pack2;
        pack2.M0 = Dyadic(7, -2);
        pack2.m_inf = Dyadic(3, -5);
        const ComplexBall lam2 =
            mean_ext_good(BorchardtTerm::extended({one, u2}, {one, s2}), pack2, 80);
        const ComplexBall zp = div(z, tau, bits);
        const ComplexBall tp = -recip(tau, bits);
        CHECK(lam2.overlaps(recip(theta_sq(Characteristic::g1(0, 0),
                                           PeriodPoint::functions_g1(zp, tp), bits), bits)));
    }
    SUBCASE("start tuples are in good position") {
        CHECK(is_good_position({one, s1}) == Tristate::kTrue);
        CHECK(is_good_position({one, s2}) == Tristate::kTrue);
        CHECK(is_good_position({one, u1}) == Tristate::kTrue);
        CHECK(is_good_position({one, u2}) == Tristate::kTrue);
    }
}

TEST_CASE("F maps hit the period coordinates") {
    SUBCASE("genus-1 constants at the fixed point of inversion") {
        const auto x = inputs_g1const(exact(0, 1), 200);
        const ComplexBall out = eval_F_g1const(x[0], 64);
        CHECK(out.radius() <= Dyadic::pow2(-64));
        CHECK(out.contains_point(Dyadic(), Dyadic(1)));
    }
    SUBCASE("genus-1 constants at a generic point") {
        const ComplexBall tau = ball_from_decimal("0.3", "1.5", 220);
        const auto x = inputs_g1const(tau, 200);
        CHECK(eval_F_g1const(x[0], 64).overlaps(tau));
    }
    SUBCASE("genus-1 functions, generic and z = 0") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", 220);
        const ComplexBall z = ball_from_decimal("0.0625", "0.125", 220);
        const PeriodPoint p = PeriodPoint::functions_g1(z, tau);
        const auto x = inputs_g1func(z, tau, 200);
        const auto out = eval_F_g1func({x[0], x[1]}, 64);
        const auto tgt = target_of(SchemeVariant::kG1Func, p, 400);
        CHECK(out[0].overlaps(tgt[0]));
        CHECK(out[1].overlaps(tgt[1]));
        CHECK(out[0].radius() <= Dyadic::pow2(-64));
        CHECK(out[1].radius() <= Dyadic::pow2(-64));

        const auto xz = inputs_g1func(exact(0), tau, 200);
        const auto outz = eval_F_g1func({xz[0], xz[1]}, 64);
        CHECK(outz[0].overlaps(tau));
        CHECK(outz[1].contains_point(Dyadic(1), Dyadic()));
    }
    SUBCASE("genus-2 constants, generic and diagonal") {
        const PeriodPoint p = sample_g2_a(220);
        const auto x = inputs_g2const(p, 200);
        const auto out = eval_F_g2const({x[0], x[1], x[2]}, 64);
        const auto tgt = target_of(SchemeVariant::kG2Const, p, 400);
        for (int i = 0; i < 3; ++i) {
            CAPTURE(i);
            CHECK(out[i].overlaps(tgt[i]));
            CHECK(out[i].radius() <= Dyadic::pow2(-64));
        }

        const PeriodPoint diag = PeriodPoint::constants_g2(
            ball_from_decimal("0", "1.1", 220), exact(0), ball_from_decimal("0", "1.3", 220));
        const auto xd = inputs_g2const(diag, 200);
        const auto outd = eval_F_g2const({xd[0], xd[1], xd[2]}, 64);
        CHECK(outd[0].overlaps(ball_from_decimal("0", "1.1", 220)));
        CHECK(outd[1].overlaps(ball_from_decimal("0", "1.3", 220)));
        CHECK(outd[2].overlaps(ball_from_decimal("1.43", "0", 220)));
    }
    SUBCASE("inputs far from any theta quotient are rejected") {
        CHECK_THROWS_AS(eval_F_g1const(exact(5), 32), OutsideBasin);
        CHECK_THROWS_AS(eval_F_g2const({exact(5), exact(-7), exact(11)}, 32), OutsideBasin);
    }
}

TEST_CASE("targets are exact dyadic points") {
    const PeriodPoint p = sample_g2_a(200);
    const auto tgt = target_of(SchemeVariant::kG2Const, p, 128);
    for (const auto& t : tgt) CHECK(t.is_exact());
    // At 250 bits the midpoint rounding is exact (the inputs carry about 200
    // significant bits), so the third coordinate must land inside the ball
    // product tau12^2 - tau11 tau22.
    const auto fine = target_of(SchemeVariant::kG2Const, p, 250);
    CHECK(fine[2].overlaps(sub(mul(p.tau12, p.tau12, 200), mul(p.tau11, p.tau22, 200), 200)));

    const PeriodPoint pf =
        PeriodPoint::functions_g1(ball_from_decimal("0.0625", "0.125", 200),
                                  ball_from_decimal("0.25", "1.3", 200));
    const auto tf = target_of(SchemeVariant::kG1Func, pf, 128);
    CHECK(tf[0].is_exact());
    CHECK(tf[1].is_exact());
    // w = exp(2 pi i z^2 / tau) for the sample, reference from mpmath.
    CHECK(tf[1].overlaps(ball_from_decimal("0.9318647588185663444493077024975",
                                           "0.0581510495978532483116692083311", 110)
                             .inflate(Dyadic::pow2(-90))));
}

TEST_CASE("solve_quotients refines seeds to certified quotients") {
    SUBCASE("genus-1 constants round trip") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", 300);
        const PeriodPoint p = PeriodPoint::constants_g1(tau);
        std::vector<NewtonTraceEntry> trace;
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG1Const, p, 256, &trace);
        REQUIRE(q.values.size() == 1);
        CHECK(q.values[0].radius() <= Dyadic::pow2(-256));
        const auto ref = inputs_g1const(p.midpoints().tau11, 320);
        CHECK(q.values[0].overlaps(ref[0]));
        REQUIRE(!trace.empty());
        CHECK(trace.front().n == 58);
        CHECK(trace.back().nprime >= 256 + 7 + 2);
        for (size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].n > trace[i - 1].n);
    }
    SUBCASE("genus-2 constants round trip") {
        const PeriodPoint p = sample_g2_a(500);
        std::vector<NewtonTraceEntry> trace;
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG2Const, p, 400, &trace);
        REQUIRE(q.values.size() == 3);
        const auto ref = inputs_g2const(p.midpoints(), 460);
        for (int i = 0; i < 3; ++i) {
            CAPTURE(i);
            CHECK(q.values[i].radius() <= Dyadic::pow2(-400));
            CHECK(q.values[i].overlaps(ref[i]));
        }
        CHECK(trace.front().n == 222);
    }
    SUBCASE("genus-1 functions round trip") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", 2100);
        const ComplexBall z = ball_from_decimal("0.0625", "0.125", 2100);
        const PeriodPoint p = PeriodPoint::functions_g1(z, tau);
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG1Func, p, 1800);
        REQUIRE(q.values.size() == 2);
        const PeriodPoint pm = p.midpoints();
        const auto ref = inputs_g1func(pm.z1, pm.tau11, 1900);
        for (int i = 0; i < 2; ++i) {
            CAPTURE(i);
            CHECK(q.values[i].radius() <= Dyadic::pow2(-1800));
            CHECK(q.values[i].overlaps(ref[i]));
        }
    }
    SUBCASE("points outside the reduced domain are rejected") {
        CHECK_THROWS_AS(solve_quotients(SchemeVariant::kG1Const,
                                        PeriodPoint::constants_g1(exact(0, 3)), 128),
                        DomainError);
        CHECK_THROWS_AS(solve_quotients(SchemeVariant::kG1Const,
                                        PeriodPoint::constants_g1(ComplexBall(
                                            Dyadic(), Dyadic(1), Dyadic::pow2(-4))),
                                        128),
                        DomainError);
    }
}

TEST_CASE("quotients unwind to certified squared theta values") {
    SUBCASE("genus 1 constants, plus the Jacobi quartic identity") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", 400);
        const PeriodPoint p = PeriodPoint::constants_g1(tau);
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG1Const, p, 360);
        const auto th = quotients_to_squared_thetas(SchemeVariant::kG1Const, q, p, 250);
        REQUIRE(th.size() == 4);
        const PeriodPoint pm = PeriodPoint::constants_g1(p.midpoints().tau11);
        for (const auto& [ch, val] : th) {
            if (!ch.is_even()) {
                CHECK(val.is_exact());
                CHECK(val.re_mid().is_zero());
                CHECK(val.im_mid().is_zero());
                continue;
            }
            CHECK(val.radius() <= Dyadic::pow2(-250));
            CHECK(val.overlaps(theta_sq(ch, pm, 300)));
        }
        // theta_00^4 - theta_01^4 - theta_10^4 contains zero.
        const ComplexBall quartic =
            sub(mul(th[0].second, th[0].second, 300),
                add(mul(th[1].second, th[1].second, 300),
                    mul(th[2].second, th[2].second, 300), 300),
                300);
        CHECK(quartic.contains_point(Dyadic(), Dyadic()));
    }
    SUBCASE("genus 1 functions") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", 2100);
        const ComplexBall z = ball_from_decimal("0.0625", "0.125", 2100);
        const PeriodPoint p = PeriodPoint::functions_g1(z, tau);
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG1Func, p, 1800);
        const auto th = quotients_to_squared_thetas(SchemeVariant::kG1Func, q, p, 1600);
        REQUIRE(th.size() == 4);
        const PeriodPoint pm = p.midpoints();
        const PeriodPoint pz = PeriodPoint::functions_g1(pm.z1, pm.tau11);
        for (const auto& [ch, val] : th) {
            CAPTURE(ch.a[0]);
            CAPTURE(ch.b[0]);
            CHECK(val.radius() <= Dyadic::pow2(-1600));
            CHECK(val.overlaps(theta_sq(ch, pz, 1700)));
        }
    }
    SUBCASE("genus 2 constants, generic point") {
        const PeriodPoint p = sample_g2_a(560);
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG2Const, p, 500);
        const auto th = quotients_to_squared_thetas(SchemeVariant::kG2Const, q, p, 380);
        REQUIRE(th.size() == 10);
        const PeriodPoint pm = p.midpoints();
        for (const auto& [ch, val] : th) {
            CAPTURE(ch.a[0] * 2 + ch.a[1]);
            CHECK(val.radius() <= Dyadic::pow2(-380));
            CHECK(val.overlaps(theta_sq(ch, pm, 440)));
        }
    }
    SUBCASE("genus 2 at the tall corner of the reduced cell") {
        // Im tau22 = 8 with the off-diagonal at its bound; the transported
        // tuples here have spreads of order 1e5 and exercise the means'
        // runtime good-position discovery.
        const PeriodPoint corner = PeriodPoint::constants_g2(
            ComplexBall(Dyadic(1, -1), Dyadic(2)), ComplexBall(Dyadic(1, -1), Dyadic(1)),
            ComplexBall(Dyadic(1, -1), Dyadic(8)));
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG2Const, corner, 300);
        const auto th = quotients_to_squared_thetas(SchemeVariant::kG2Const, q, corner, 180);
        REQUIRE(th.size() == 10);
        for (const auto& [ch, val] : th) {
            CAPTURE(ch.b[0] * 2 + ch.b[1]);
            CHECK(val.radius() <= Dyadic::pow2(-180));
            CHECK(val.overlaps(theta_sq(ch, corner, 240)));
        }
    }
    SUBCASE("genus 2 diagonal point splits into genus-1 products") {
        const PeriodPoint p = PeriodPoint::constants_g2(ball_from_decimal("0", "1.1", 500),
                                                        exact(0),
                                                        ball_from_decimal("0", "1.4", 500));
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG2Const, p, 440);
        const auto th = quotients_to_squared_thetas(SchemeVariant::kG2Const, q, p, 320);
        const PeriodPoint pm = p.midpoints();
        const PeriodPoint p1 = PeriodPoint::constants_g1(pm.tau11);
        const PeriodPoint p2 = PeriodPoint::constants_g1(pm.tau22);
        for (const auto& [ch, val] : th) {
            const ComplexBall ref = mul(theta_sq(Characteristic::g1(ch.a[0], ch.b[0]), p1, 380),
                                        theta_sq(Characteristic::g1(ch.a[1], ch.b[1]), p2, 380),
                                        380);
            CAPTURE(ch.a[0] * 2 + ch.a[1]);
            CAPTURE(ch.b[0] * 2 + ch.b[1]);
            CHECK(val.overlaps(ref));
        }
    }
    SUBCASE("input gates") {
        const ComplexBall tau = ball_from_decimal("0.25", "1.3", 300);
        const PeriodPoint p = PeriodPoint::constants_g1(tau);
        const ThetaQuotients q = solve_quotients(SchemeVariant::kG1Const, p, 280);
        // Too coarse for the requested output precision.
        CHECK_THROWS_AS(quotients_to_squared_thetas(SchemeVariant::kG1Const, q, p, 260),
                        PrecisionError);
        // Wrong arity.
        ThetaQuotients bad;
        bad.values = {exact(1)};
        CHECK_THROWS_AS(quotients_to_squared_thetas(SchemeVariant::kG2Const, bad, sample_g2_a(64),
                                                    32),
                        std::invalid_argument);
        // Quotients from a different point.
        const PeriodPoint other = PeriodPoint::constants_g1(ball_from_decimal("0", "1.8", 300));
        CHECK_THROWS_AS(quotients_to_squared_thetas(SchemeVariant::kG1Const, q, other, 150),
                        DomainError);
    }
}

TEST_CASE("hard-wired constants audit on small grids") {
    SUBCASE("genus-1 starting moduli sit inside the certified brackets") {
        const char* taus[][2] = {{"-0.5", "1"},   {"0", "1"},   {"0.5", "1"},
                                 {"0.25", "1.3"}, {"0", "2"},   {"-0.5", "2"},
                                 {"0.5", "0.87"}, {"0", "1.2"}, {"-0.25", "1.55"}};
        for (const auto& ts : taus) {
            CAPTURE(ts[0]);
            CAPTURE(ts[1]);
            const ComplexBall tau = ball_from_decimal(ts[0], ts[1], 120);
            const auto x = inputs_g1const(tau, 100);
            const auto q = duplication_squared_quotients(SchemeVariant::kG1Const, x, 100);
            const double s1 = div(q[1], q[0], 100).abs_mid_upper().to_double();
            const double s2 = div(q[2], q[0], 100).abs_mid_upper().to_double();
            CHECK(s1 >= 0.56);
            CHECK(s1 <= 1.7);
            CHECK(s2 >= 0.13);
            CHECK(s2 <= 1.38);
            // |F| stays under the scheme's magnitude bound M = 27.
            const ComplexBall out = eval_F_g1const(x[0], 32);
            CHECK(out.abs_upper().to_double() <= 27.0);
        }
    }
    SUBCASE("genus-1 function tuples respect the extended-mean brackets") {
        const ComplexBall taus[3] = {exact(0, 1), ball_from_decimal("0.25", "1.3", 140),
                                     ComplexBall(Dyadic(-1, -1), Dyadic(2))};
        for (const ComplexBall& tau : taus) {
            for (int xs = -1; xs <= 1; ++xs) {
                for (int ys = -1; ys <= 1; ++ys) {
                    const ComplexBall z(Dyadic(xs, -3), tau.im_mid().mul_pow2(-3) *
                                                            Dyadic(ys));
                    const auto x = inputs_g1func(z, tau, 100);
                    const auto q =
                        duplication_squared_quotients(SchemeVariant::kG1Func, x, 100);
                    const double u1 = div(q[4], q[3], 100).abs_mid_upper().to_double();
                    const double u2 = div(q[5], q[3], 100).abs_mid_upper().to_double();
                    CAPTURE(xs);
                    CAPTURE(ys);
                    CHECK(u1 >= 0.51);
                    CHECK(u1 <= 1.94);
                    CHECK(u2 >= 0.1);
                    CHECK(u2 <= 1.69);
                }
            }
        }
    }
    SUBCASE("genus-2 tuples stay in range and in good position, corners included") {
        // At the tall corner of the cell the m1/m2 tuples legitimately reach
        // moduli of order exp(pi Im tau22 / 2) ~ 1e5, so the ranges here are
        // wide; the structural property the means rely on is good position.
        const PeriodPoint corner = PeriodPoint::constants_g2(
            ComplexBall(Dyadic(1, -1), Dyadic(2)), ComplexBall(Dyadic(1, -1), Dyadic(1)),
            ComplexBall(Dyadic(1, -1), Dyadic(8)));
        REQUIRE(in_reduced_domain(SchemeVariant::kG2Const, corner) == Tristate::kTrue);
        int idx = 0;
        for (const PeriodPoint& p : {sample_g2_a(140), sample_g2_b(140), corner}) {
            CAPTURE(idx);
            const auto x = inputs_g2const(p, 110);
            const auto q = duplication_squared_quotients(SchemeVariant::kG2Const, x, 110);
            auto tuple_in = [&](const ComplexBall& den, int i1, int i2, int i3, double lo,
                                double hi) {
                std::vector<ComplexBall> tuple = {exact(1)};
                for (int i : {i1, i2, i3}) {
                    const ComplexBall v = div(q[i], den, 110);
                    const double m = v.abs_mid_upper().to_double();
                    CAPTURE(i);
                    CHECK(m >= lo);
                    CHECK(m <= hi);
                    tuple.push_back(v);
                }
                CHECK(is_good_position(tuple) == Tristate::kTrue);
            };
            tuple_in(q[0], 1, 2, 3, 0.05, 1.1);
            tuple_in(q[6], 7, 0, 1, 1e-7, 1e6);
            tuple_in(q[4], 0, 5, 2, 1e-7, 1e6);
            tuple_in(q[0], 6, 4, 8, 1e-9, 1.5);
            ++idx;
        }
    }
    SUBCASE("theta_00 magnitude bracket at half the period matrix") {
        for (const PeriodPoint& p : {sample_g2_a(140), sample_g2_b(140)}) {
            const PeriodPoint ph = PeriodPoint::constants_g2(
                mul_pow2(p.tau11, -1), mul_pow2(p.tau12, -1), mul_pow2(p.tau22, -1));
            const ComplexBall t0 = theta_naive(Characteristic::g2(0, 0, 0, 0), ph, 80);
            CHECK(t0.abs_mid_upper().to_double() < 2.66);
            CHECK(t0.abs_mid_lower().to_double() > 0.44);
        }
    }
}

TEST_CASE("finite-difference audit of the inverse-Jacobian bounds") {
    SUBCASE("genus-1 constants at tau = i") {
        const auto js =
            jacobian_bound_check(SchemeVariant::kG1Const, {PeriodPoint::constants_g1(exact(0, 1))});
        REQUIRE(js.size() == 1);
        CHECK(js[0].pass);
        CHECK(js[0].estimate.sign() > 0);
        CHECK(js[0].bound == Dyadic::pow2(7));
    }
    SUBCASE("genus-1 functions near a real z") {
        const auto js = jacobian_bound_check(
            SchemeVariant::kG1Func,
            {PeriodPoint::functions_g1(ball_from_decimal("0.01", "0", 140),
                                       ball_from_decimal("0", "1.1", 140))});
        REQUIRE(js.size() == 1);
        CHECK(js[0].pass);
        CHECK(js[0].bound == Dyadic::pow2(17));
    }
    SUBCASE("genus-2 constants at a diagonal point") {
        const auto js = jacobian_bound_check(
            SchemeVariant::kG2Const,
            {PeriodPoint::constants_g2(ball_from_decimal("0", "1.05", 140), exact(0),
                                       ball_from_decimal("0", "1.2", 140)),
             sample_g2_a(140)});
        REQUIRE(js.size() == 2);
        CHECK(js[0].pass);
        CHECK(js[1].pass);
        CHECK(js[0].bound == Dyadic::pow2(14));
    }
}

TEST_CASE("constants table serializes to JSON") {
    const auto root = nlohmann::json::parse(scheme_constants_json());
    REQUIRE(root.contains("g1_constants"));
    REQUIRE(root.contains("g1_functions"));
    REQUIRE(root.contains("g2_constants"));
    CHECK(root["g1_constants"]["start_bits"] == 58);
    CHECK(root["g1_functions"]["start_bits"] == 1548);
    CHECK(root["g2_constants"]["start_bits"] == 222);
    CHECK(root["g2_constants"]["transport"].size() == 3);
    CHECK(root["g2_constants"]["observed_start_ranges"].size() == 4);
    CHECK(root["g1_functions"]["extended_bounds"].size() == 2);
    CHECK(root["g1_constants"]["borchardt_brackets"].size() == 2);
    // Dyadic fields round-trip through the hex format.
    const Dyadic b3 = Dyadic::parse_hex(root["g2_constants"]["B3"].get<std::string>());
    CHECK(b3 == Dyadic::pow2(14));
}

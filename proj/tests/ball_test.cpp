// Tests for complex ball arithmetic: exactness where exact, rigorous
// containment everywhere, and branch handling of the square roots.

#include <cmath>
#include <random>
#include <vector>

#include "ctheta/ball.hpp"
#include "ctheta/errors.hpp"
#include "doctest.h"

using ctheta::ComplexBall;
using ctheta::Dyadic;
namespace rnd = ctheta::rnd;

namespace {

std::mt19937_64 rng(777u);

Dyadic random_coord() {
    std::uniform_int_distribution<long> mant(-(1L << 20), 1L << 20);
    std::uniform_int_distribution<long> exps(-24, 2);
    return Dyadic(mpz_class(mant(rng)), exps(rng));
}

ComplexBall random_ball(long rad_exp) {
    return ComplexBall(random_coord(), random_coord(), Dyadic::pow2(rad_exp));
}

// A point of the closed ball: midpoint plus (j/8, k/8) of the radius.
ComplexBall representative(const ComplexBall& b, int j, int k) {
    Dyadic eighth = b.radius().mul_pow2(-3);
    return ComplexBall(b.re_mid() + eighth * Dyadic(j), b.im_mid() + eighth * Dyadic(k));
}

// The exact value tracked by `rep` (a tiny ball) must lie inside `out`.
bool absorbed(const ComplexBall& out, const ComplexBall& rep) {
    return out.inflate(rep.radius()).contains_point(rep.re_mid(), rep.im_mid());
}

}  // namespace

TEST_CASE("exact ball arithmetic stays exact") {
    ComplexBall a(Dyadic(1)), b(Dyadic(0), Dyadic(1));
    ComplexBall s = add(a, b, 64);
    CHECK(s.re_mid() == Dyadic(1));
    CHECK(s.im_mid() == Dyadic(1));
    CHECK(s.is_exact());
    ComplexBall p = mul(ComplexBall(Dyadic(2)), ComplexBall(Dyadic(3)), 64);
    CHECK(p.re_mid() == Dyadic(6));
    CHECK(p.im_mid().is_zero());
    CHECK(p.is_exact());
}

TEST_CASE("interval product inflates the radius") {
    ComplexBall one(Dyadic(1), Dyadic(0), Dyadic::pow2(-10));
    ComplexBall sq = mul(one, one, 64);
    CHECK(sq.radius() >= Dyadic::pow2(-9));
    CHECK(sq.contains_point(Dyadic(1), Dyadic(0)));
}

TEST_CASE("division certifies and rejects zero divisors") {
    ComplexBall q = ctheta::div(ComplexBall(Dyadic(6)), ComplexBall(Dyadic(3)), 64);
    CHECK(q.contains_point(Dyadic(2), Dyadic(0)));
    CHECK(q.radius() <= Dyadic::pow2(-60));
    ComplexBall z(Dyadic(1), Dyadic(0), Dyadic(2));
    CHECK_THROWS_AS(ctheta::recip(z, 64), ctheta::DomainError);
    CHECK_THROWS_AS(ctheta::div(q, z, 64), ctheta::DomainError);
}

TEST_CASE("principal square root") {
    ComplexBall four(Dyadic(4));
    ComplexBall r = sqrt_principal(four, 64);
    CHECK(r.re_mid() == Dyadic(2));
    CHECK(r.im_mid().is_zero());
    CHECK(r.is_exact());

    // sqrt(2) against the integer-square-root oracle floor(2^100 sqrt 2).
    ComplexBall two(Dyadic(2));
    ComplexBall s = sqrt_principal(two, 64);
    mpz_class big = 2;
    big <<= 200;
    mpz_class isq;
    mpz_sqrt(isq.get_mpz_t(), big.get_mpz_t());
    Dyadic oracle(isq, -100);
    CHECK(s.radius() <= Dyadic::pow2(-60));
    CHECK((s.re_mid() - oracle).abs() <= s.radius() + Dyadic::pow2(-100));

    // Just above the cut the principal branch sits near +i.
    ComplexBall near_cut(Dyadic(-1), Dyadic::pow2(-30), Dyadic::pow2(-40));
    ComplexBall t = sqrt_principal(near_cut, 64);
    CHECK(t.im_mid() > Dyadic(mpz_class(9), -4));  // > 0.5625
    CHECK(t.re_mid().abs() < Dyadic(mpz_class(1), -4));

    // A ball across the cut degrades to an origin-centered enclosure.
    ComplexBall straddle(Dyadic(-1), Dyadic(0), Dyadic::pow2(-10));
    ComplexBall blown = sqrt_principal(straddle, 64);
    CHECK(blown.re_mid().is_zero());
    CHECK(blown.im_mid().is_zero());
    CHECK(blown.contains_point(Dyadic(0), Dyadic(1)));

    CHECK_THROWS_AS(sqrt_principal(ComplexBall(Dyadic(0), Dyadic(0), Dyadic(1)), 64),
                    ctheta::DomainError);
}

TEST_CASE("anchored square root picks the nearer branch") {
    ComplexBall four(Dyadic(4));
    ComplexBall m = sqrt_near(four, ComplexBall(Dyadic(mpz_class(-19), 0), Dyadic(0)), 64);
    CHECK(m.re_mid() == Dyadic(-2));
    CHECK(m.is_exact());

    ComplexBall p = sqrt_near(four, ComplexBall(Dyadic(mpz_class(21), -3), Dyadic::pow2(-3)), 64);
    CHECK(p.re_mid() == Dyadic(2));

    // sqrt(i) anchored at e^{i pi/4}: both components near sqrt(1/2).
    ComplexBall iball(Dyadic(0), Dyadic(1));
    ComplexBall r = sqrt_near(iball, ComplexBall(Dyadic(1), Dyadic(1)), 64);
    CHECK(std::abs(r.re_mid().to_double() - 0.7071067811865476) < 1e-12);
    CHECK(std::abs(r.im_mid().to_double() - 0.7071067811865476) < 1e-12);

    // Orthogonal anchor cannot separate the candidates.
    CHECK_THROWS_AS(sqrt_near(four, ComplexBall(Dyadic(0), Dyadic(1)), 64),
                    ctheta::AmbiguousBranch);
    CHECK_THROWS_AS(sqrt_near(ComplexBall(Dyadic(0), Dyadic(0), Dyadic(1)),
                              ComplexBall(Dyadic(1)), 64),
                    ctheta::DomainError);
}

TEST_CASE("anchored square root squares back over the input") {
    for (int i = 0; i < 100; ++i) {
        ComplexBall a = random_ball(-30);
        if (!a.excludes_zero()) continue;
        ComplexBall anchor = random_ball(-40);
        if (!anchor.excludes_zero()) continue;
        ComplexBall s;
        try {
            s = sqrt_near(a, anchor, 96);
        } catch (const ctheta::AmbiguousBranch&) {
            continue;
        }
        ComplexBall sq = mul(s, s, 96);
        CHECK(sq.contains_point(a.re_mid(), a.im_mid()));
    }
}

TEST_CASE("exp and log") {
    ComplexBall e0 = exp_ball(ComplexBall(Dyadic(0)), 64);
    CHECK(e0.re_mid() == Dyadic(1));
    CHECK(e0.im_mid().is_zero());
    CHECK(e0.radius() <= Dyadic::pow2(-64));

    ComplexBall l1 = log_ball(ComplexBall(Dyadic(1)), 64);
    CHECK(l1.re_mid().is_zero());
    CHECK(l1.im_mid().is_zero());
    CHECK(l1.is_exact());

    // exp(i pi) encloses -1 when pi itself is a certified ball.
    ComplexBall pi = ctheta::pi_ball(128);
    ComplexBall em = exp_ball(mul_i(pi), 128);
    CHECK(em.contains_point(Dyadic(-1), Dyadic(0)));

    CHECK_THROWS_AS(log_ball(ComplexBall(Dyadic(-1), Dyadic(0), Dyadic::pow2(-10)), 64),
                    ctheta::DomainError);
    CHECK_THROWS_AS(log_ball(ComplexBall(Dyadic(0), Dyadic(0), Dyadic::pow2(-10)), 64),
                    ctheta::DomainError);
}

TEST_CASE("containment monotonicity under representative sampling") {
    const int offsets[5] = {-8, -4, 0, 5, 8};
    for (int i = 0; i < 40; ++i) {
        ComplexBall a = random_ball(-28), b = random_ball(-26);
        ComplexBall sum = add(a, b, 80), dif = sub(a, b, 80), prd = mul(a, b, 80);
        ComplexBall ea = exp_ball(a, 80);
        for (int j : offsets) {
            for (int k : offsets) {
                if (j * j + k * k > 64) continue;
                ComplexBall pa = representative(a, j, k);
                ComplexBall pb = representative(b, k, j);
                CHECK(absorbed(sum, add(pa, pb, 160)));
                CHECK(absorbed(dif, sub(pa, pb, 160)));
                CHECK(absorbed(prd, mul(pa, pb, 160)));
                CHECK(absorbed(ea, exp_ball(pa, 160)));
                if (b.excludes_zero() && pb.excludes_zero())
                    CHECK(absorbed(ctheta::div(a, b, 80), ctheta::div(pa, pb, 160)));
                if (a.excludes_zero() && avoids_negative_axis(a))
                    CHECK(absorbed(sqrt_principal(a, 80), sqrt_principal(pa, 160)));
                if (a.excludes_zero() && avoids_negative_axis(a))
                    CHECK(absorbed(log_ball(a, 80), log_ball(pa, 160)));
            }
        }
    }
}

TEST_CASE("higher working precision never doubles the radius") {
    for (int i = 0; i < 60; ++i) {
        ComplexBall a = random_ball(-20), b = random_ball(-22);
        auto check_pair = [](const ComplexBall& lo, const ComplexBall& hi) {
            CHECK(hi.radius() <= lo.radius() * Dyadic(2));
        };
        check_pair(add(a, b, 48), add(a, b, 192));
        check_pair(mul(a, b, 48), mul(a, b, 192));
        check_pair(exp_ball(a, 48), exp_ball(a, 192));
        if (b.excludes_zero()) check_pair(ctheta::div(a, b, 48), ctheta::div(a, b, 192));
        if (a.excludes_zero() && avoids_negative_axis(a)) {
            check_pair(sqrt_principal(a, 48), sqrt_principal(a, 192));
            check_pair(log_ball(a, 48), log_ball(a, 192));
        }
    }
}

TEST_CASE("geometry predicates and exact maps") {
    ComplexBall big(Dyadic(0), Dyadic(0), Dyadic(4));
    ComplexBall small(Dyadic(1), Dyadic(1), Dyadic(1));
    CHECK(big.contains_ball(small));
    CHECK(!small.contains_ball(big));
    CHECK(small.overlaps(big));
    CHECK(!small.overlaps(ComplexBall(Dyadic(10), Dyadic(0), Dyadic(1))));
    CHECK(big.contains_point(Dyadic(2), Dyadic(2)));
    CHECK(!big.contains_point(Dyadic(3), Dyadic(3)));

    ComplexBall x(Dyadic(3), Dyadic(5), Dyadic::pow2(-8));
    ComplexBall i1 = unit_mul(x, 1);
    CHECK(i1.re_mid() == Dyadic(-5));
    CHECK(i1.im_mid() == Dyadic(3));
    CHECK(unit_mul(x, 4).re_mid() == x.re_mid());
    CHECK(unit_mul(unit_mul(x, 3), 1).re_mid() == x.re_mid());
    CHECK(unit_mul(x, -1).im_mid() == Dyadic(-3));

    ComplexBall h = mul_pow2(x, -1);
    CHECK(h.re_mid() == Dyadic(mpz_class(3), -1));
    CHECK(h.radius() == Dyadic::pow2(-9));

    ComplexBall scaled = mul_dyadic(x, Dyadic(mpz_class(-3), -1), 64);
    CHECK(scaled.re_mid() == Dyadic(mpz_class(-9), -1));
    CHECK(scaled.radius() >= Dyadic(mpz_class(3), -10));

    ComplexBall rm = ComplexBall(Dyadic(mpz_class(12345677), -20), Dyadic(1)).round_mid(8);
    CHECK(rm.contains_point(Dyadic(mpz_class(12345677), -20), Dyadic(1)));
}

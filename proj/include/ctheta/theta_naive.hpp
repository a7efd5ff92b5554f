// Certified evaluation of theta constants (genus 1 and 2) and genus-1 theta
// functions by partial sums of the defining series, with explicit geometric
// tail bounds.

#pragma once

#include <optional>

#include "ctheta/ball.hpp"

namespace ctheta {

// Theta characteristic (a, b), entries in {0, 1}.
struct Characteristic {
    int g = 1;
    int a[2] = {0, 0};
    int b[2] = {0, 0};

    static Characteristic g1(int a, int b);
    static Characteristic g2(int a1, int a2, int b1, int b2);

    // Even characteristics have a.b even; odd ones make theta odd in z, so
    // the corresponding theta constant vanishes identically.
    bool is_even() const { return ((a[0] * b[0] + a[1] * b[1]) & 1) == 0; }
};

// A point (z, tau) with tau in the Siegel upper half space, stored as the
// upper triangle of balls; z absent means theta constants (z = 0).
struct PeriodPoint {
    int g = 1;
    ComplexBall tau11, tau12, tau22;
    bool has_z = false;
    ComplexBall z1, z2;

    static PeriodPoint constants_g1(const ComplexBall& tau);
    static PeriodPoint functions_g1(const ComplexBall& z, const ComplexBall& tau);
    static PeriodPoint constants_g2(const ComplexBall& t11, const ComplexBall& t12,
                                    const ComplexBall& t22);
    static PeriodPoint functions_g2(const ComplexBall& z1, const ComplexBall& z2,
                                    const ComplexBall& t11, const ComplexBall& t12,
                                    const ComplexBall& t22);

    // Throws DomainError unless Im tau is rigorously positive definite over
    // the whole input balls (g=2 uses the leading minor and the determinant).
    void validate() const;

    // Rigorous positive lower bound on the smallest eigenvalue of Im tau;
    // det/trace for g=2. Requires validate() to pass.
    Dyadic im_tau_min_eig_lower() const;

    // Upper bound on ||Im z||_2 over the balls (zero when z is absent).
    Dyadic im_z_norm_upper() const;

    // The same point with all ball radii dropped.
    PeriodPoint midpoints() const;
};

// Upper bound on |sum_{|n| >= R} exp(pi i n^2 tau + 2 pi i n z)| valid for
// Im tau >= im_tau_lower > 0 and |Im z| <= im_z_upper, by bounding the ratio
// of consecutive terms from the term at n = R on. Returns nullopt when that
// ratio reaches 1 (caller must increase R).
std::optional<Dyadic> tail_bound_g1(const Dyadic& im_tau_lower, const Dyadic& im_z_upper,
                                    long R);

// Genus-2 analogue over max-norm shells ||m||_inf >= R >= 1: each shell k has
// 8k lattice points whose shifted index m + a/2 has norm at least k - 1/2, so
// the shell sum is at most 8k exp(-pi lambda (k-1/2)^2 + 2 pi (k-1/2) zeta)
// with lambda a lower bound on the smallest eigenvalue of Im tau and
// zeta >= ||Im z||_2; the shell sums are then majorized geometrically.
// Requires R - 1/2 >= zeta/lambda for monotonicity; nullopt otherwise or when
// the shell ratio reaches 1.
std::optional<Dyadic> tail_bound_g2(const Dyadic& lambda_min_lower,
                                    const Dyadic& im_z_norm_upper, long R);

// Ball of radius <= 2^-target containing theta_{a,b}(z, tau) for every point
// of the input balls. The cutoff is chosen so the proven tail bound is at
// most 2^-(target+2). Throws PrecisionError (with the achievable precision)
// when the input radii make the target unreachable.
ComplexBall theta_naive(const Characteristic& ch, const PeriodPoint& p, Precision target);

}  // namespace ctheta

#pragma once

// Argument reduction for genus 1 and 2 and a uniform-cost evaluator for
// genus-2 squared theta constants. Reduction maps a period matrix into the
// standard fundamental domain by an explicit symplectic matrix; the uniform
// evaluator climbs duplication ladders so that the certified Newton scheme
// (bounded imaginary parts) or the naive series (imaginary parts large
// enough that it is cheap) can always be used at the base point.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "ctheta/ball.hpp"
#include "ctheta/theta_naive.hpp"

namespace ctheta {

// One rung of a duplication ladder, recorded top-down (from the input
// towards the base point). kD1 halves the period matrix; for genus-1
// function certificates it records one halving of z instead. kD2 doubles
// tau11 and halves tau22. kRealShift adds the stored symmetric integer
// matrix to tau.
enum class RungKind { kD1, kD2, kRealShift };

struct LadderRung {
    RungKind kind = RungKind::kD1;
    long b11 = 0, b12 = 0, b22 = 0;
};

// Replayable description of a reduction. gamma is a row-major 2g x 2g
// symplectic matrix mapping the input to the reduced point; z_shift holds
// (m, n) with z_reduced = z - m - n*tau; dup_ladder and signs describe the
// uniform algorithm's descent and the square-root branches chosen on the
// climb (one entry of {-1, +1} per recovered value, relative to the
// principal branch; 0 marks slots recovered from the low-precision series
// fallback rather than the good-position rule).
struct ReductionCertificate {
    int genus = 1;
    std::vector<mpz_class> gamma;
    std::array<mpz_class, 2> z_shift = {mpz_class(0), mpz_class(0)};
    std::vector<LadderRung> dup_ladder;
    std::vector<std::array<int, 4>> signs;

    std::string to_json() const;
};

// Exact integer check of gamma^T J gamma = J for the standard symplectic
// form; m is row-major 2g x 2g.
bool is_symplectic(const std::vector<mpz_class>& m, int genus);

// Ball evaluation of the fractional-linear action recorded in a
// certificate's gamma.
ComplexBall apply_gamma_g1(const std::vector<mpz_class>& gamma, const ComplexBall& tau,
                           Precision work);
std::array<ComplexBall, 3> apply_gamma_g2(const std::vector<mpz_class>& gamma,
                                          const ComplexBall& t11, const ComplexBall& t12,
                                          const ComplexBall& t22, Precision work);

// Replays a dup_ladder downwards from tau = (t11, t12, t22).
std::array<ComplexBall, 3> apply_ladder(const std::vector<LadderRung>& ladder,
                                        const std::array<ComplexBall, 3>& tau, Precision work);

struct ReducedG1 {
    ComplexBall tau;
    ReductionCertificate cert;
};

// SL2(Z) reduction of tau to |Re| <= 1/2, |tau| >= 1. The postconditions
// are certified on the output ball; when the input radius makes a boundary
// decision impossible even after precision-doubling retries, throws
// PrecisionError. Requires Im tau > 0 rigorously (DomainError otherwise).
ReducedG1 reduce_g1(const ComplexBall& tau);

struct ReducedG2 {
    ComplexBall tau11, tau12, tau22;
    ReductionCertificate cert;
};

// Sp4(Z) reduction: interleaves Minkowski reduction of Im tau (2D lattice
// reduction), integer shifts of Re tau, and the 19 Gottschling inversions
// until |det(C tau + D)| >= 1 holds for all of them. Certified like
// reduce_g1; iteration capped, with PrecisionError on failure to settle.
ReducedG2 reduce_g2(const ComplexBall& t11, const ComplexBall& t12, const ComplexBall& t22);

struct ReducedZ {
    ComplexBall z;
    ReductionCertificate cert;
};

// Lattice reduction of z modulo Z + tau Z: z' = z - m - n tau with
// |Re z'| <= 1/2 and |Im z'| <= Im(tau)/2 (n from Im z / Im tau, then m
// from the real part). The certificate additionally records, as kD1 rungs,
// how many halvings of z' land it in the |Re| <= 1/8, |Im| <= Im(tau)/8
// box that the genus-1 function scheme wants. tau must be reduced.
ReducedZ reduce_z_g1(const ComplexBall& z, const ComplexBall& tau);

// The ten even genus-2 characteristics in the canonical order used by all
// squared-theta maps in this library.
const std::array<Characteristic, 10>& even_characteristics_g2();

// One D1 rung: the ten squared theta constants at tau from the four plain
// values t = (theta_{0,b}(tau/2))_b, b in index order 00, 01, 10, 11.
std::vector<std::pair<Characteristic, ComplexBall>> dup_step_d1(
    const std::array<ComplexBall, 4>& t, Precision work);

// One D2 rung: the ten squared theta constants at tau from the four plain
// values v = theta_{a,b}(D2(tau)) for (a,b) in ((00,00),(00,01),(10,00),
// (10,01)), where D2(tau) = [[2 tau11, tau12],[tau12, tau22/2]].
std::vector<std::pair<Characteristic, ComplexBall>> dup_step_d2(
    const std::array<ComplexBall, 4>& v, Precision work);

// Maps squared theta constants at tau to squared constants at tau + B for
// a symmetric integer shift B: a pure relabeling of characteristics times
// an exact fourth root of unity.
std::vector<std::pair<Characteristic, ComplexBall>> real_shift_squares(
    const std::vector<std::pair<Characteristic, ComplexBall>>& squares, long b11, long b12,
    long b22);

// Recovers a tuple in good position from its squares: the first value gets
// the principal branch (the global sign is unobservable downstream), the
// others the branch with nonnegative certified inner product against it.
// Slots whose branch cannot be certified from the balls alone fall back to
// the signs of the reference values, which only need a few correct bits;
// with no reference available this throws NotGoodPosition. signs_out, when
// given, receives the per-slot choices in certificate convention.
std::array<ComplexBall, 4> good_position_sqrt(const std::array<ComplexBall, 4>& squares,
                                              const std::array<ComplexBall, 4>* reference,
                                              Precision work, std::array<int, 4>* signs_out);

struct UniformOptions {
    // The cusp threshold: the D2 ladder stops once Im tau11 reaches
    // cusp_constant * N and the naive series takes over.
    long cusp_constant = 10;
    // Starting value of the working-precision multiplier; doubled on each
    // restart when interval arithmetic reports too much precision loss.
    double climb_budget = 1.1;
    // Restarts allowed before giving up with PrecisionError.
    int max_restarts = 6;
};

// Squared theta constants at any tau satisfying the fundamental-domain
// inequalities (|Re tau_ij| <= 1/2, 2|Im tau12| <= Im tau11 <= Im tau22,
// |tau_ii| >= 1), certified to 2^-target, in time quasi-linear in target
// uniformly in tau. When tau already lies in the bounded Newton domain the
// call reduces to the plain Newton pipeline and returns its output
// unchanged.
std::vector<std::pair<Characteristic, ComplexBall>> theta_g2_uniform(
    const PeriodPoint& p, Precision target, const UniformOptions& opts = {},
    ReductionCertificate* cert = nullptr);

}  // namespace ctheta

// Certified Newton iteration for analytic maps f: C^r -> C^r given by a
// black-box evaluator, with an explicit working-precision schedule driven by
// a priori bounds on f. Each loop roughly doubles the certified precision of
// an approximate preimage while keeping every precision loss accounted for.

#pragma once

#include <functional>
#include <vector>

#include "ctheta/ball.hpp"

namespace ctheta {

// A priori bounds describing one root-finding problem f(x) = z0 near x0.
// Every logarithm in the iteration schedule is read off these fields, so the
// adjustable ones are kept as exact powers of two.
struct SchemeConstants {
    int r = 1;    // dimension of domain and codomain (1 to 3)
    Dyadic rho;   // polydisk radius around x0, a power of two in (0, 1]
    Dyadic M;     // bound on the sup-norm of f over the rho-polydisk, >= 1
    Dyadic B1;    // power of two >= 2(r+1)M/rho, bounds ||df|| near x0
    Dyadic B2;    // power of two >= 2(r+1)(r+2)M/rho^2, bounds ||d^2 f||
    Dyadic B3;    // power of two >= ||df(x0)^{-1}||
    long n0 = 0;  // certified starting precision, 2 log2(B1) + 2 log2(B3) + 4

    // Builds an adjusted bundle from raw bounds: rho is rounded down to a
    // power of two, B3 up, and B1, B2 are derived from the rounded rho and
    // rounded up. Shrinking rho and enlarging the B's only weakens what the
    // bundle claims, so the adjustment is always sound.
    static SchemeConstants adjusted(int r, const Dyadic& rho, const Dyadic& M,
                                    const Dyadic& B3);

    // Shape checks: dimension in range, rho a power of two in (0, 1], M >= 1,
    // B's powers of two >= 1, n0 matching the B1/B3 exponents. Magnitude
    // consistency of B1/B2 against M and rho is deliberately not enforced
    // here; newton_refine detects inconsistent bundles at runtime.
    void validate() const;
};

// Black-box evaluator for f. eval(x, n) receives an exact dyadic point (all
// coordinate balls of radius zero) inside the rho-polydisk and must return r
// balls of radius at most 2^-n around the exact value of f there.
struct EvaluatorContract {
    int r = 1;
    std::function<std::vector<ComplexBall>(const std::vector<ComplexBall>&, Precision)> eval;
};

using BallMatrix = std::vector<std::vector<ComplexBall>>;

// One per-loop record of the precision schedule, for audit traces.
struct NewtonTraceEntry {
    long n;         // certified bits at loop entry
    long m;         // the finite-difference step is eta = 2^-m
    long p;         // evaluation precision for f at the probe points
    long pprime;    // precision of the inverted Jacobian
    long nprime;    // certified bits at loop exit
    long eta_log2;  // log2(eta) = -m, kept explicit for JSON dumps
};

// Upper bound on ||d^n f|| over the half polydisk given a magnitude bound M
// over the full one: 2^n n! binom(n+r, r) M / rho^n, rounded up.
Dyadic cauchy_bound(long n, int r, const Dyadic& rho, const Dyadic& M);

// The certified starting precision n0 of a bundle.
long start_precision(const SchemeConstants& c);

// Finite-difference Jacobian: column j holds (f(x + eta e_j) - f(x)) / eta,
// probing along the real axis of coordinate j. x must be exact and eta > 0;
// a power-of-two eta keeps the division exact.
BallMatrix fd_jacobian(const EvaluatorContract& f, const std::vector<ComplexBall>& x,
                       const Dyadic& eta, Precision p);

// Inverse of an r x r ball matrix (r <= 3) by the adjugate formula. The
// determinant ball must exclude zero; otherwise SingularJacobian.
BallMatrix ball_matrix_inverse(const BallMatrix& a, Precision work);

// Newton iteration with a certified precision schedule. x_init is an exact
// dyadic vector within 2^-n0 of the true preimage x0, and z0 an exact dyadic
// vector within 2^-target of f(x0). Returns an exact dyadic vector within
// 2^-(target - log2(B3) - 1) of x0. Per loop, starting from n certified
// bits: eta = 2^-m with m = n + log2(B1 B3) + ceil(log2 r) + 2; f is probed
// at x and x + eta e_j to p = 2n + 2 ceil(log2 r) + 2 log2(B1 B3) + 9 bits;
// the finite-difference Jacobian is inverted and applied to z0 - f(x); the
// update lands on the dyadic grid at n' + 2 bits where
// n' = 2n - log2(B2 B3) - 2 is the new certified precision. Throws
// SingularJacobian if the Jacobian ball is not invertible, DivergentSchedule
// if n' <= n, and PrecisionError if a step's ball radius exceeds what the
// schedule guarantees (both indicate an inconsistent bundle or a start
// outside the basin).
std::vector<ComplexBall> newton_refine(const EvaluatorContract& f, const SchemeConstants& c,
                                       const std::vector<ComplexBall>& z0,
                                       const std::vector<ComplexBall>& x_init, Precision target,
                                       std::vector<NewtonTraceEntry>* trace = nullptr);

}  // namespace ctheta

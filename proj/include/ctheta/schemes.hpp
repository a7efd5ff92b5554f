// The three concrete Newton schemes for quasi-linear theta evaluation:
// genus-1 constants, genus-1 functions, and genus-2 constants. Each scheme
// inverts an analytic map F built from duplication steps and Borchardt means:
// F consumes low-precision theta quotients at tau/2 and returns simple
// functions of the period matrix (tau itself, exp(2 pi i z^2/tau), or the
// entries (tau11, tau22, tau12^2 - tau11 tau22)), which the caller knows
// exactly. Refining the quotients with newton_refine against that known
// target and unwinding one more round of means then yields squared theta
// values at any requested precision.
//
// All certified convergence constants (basin radius rho, the bound M on |F|,
// the bound B3 on the inverse Jacobian, and the Borchardt good-position
// brackets) are hard-wired for inputs in the reduced domains R1, S1, R2
// defined below; outside them nothing is guaranteed and the maps typically
// throw OutsideBasin.

#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "ctheta/newton.hpp"
#include "ctheta/theta_naive.hpp"
#include "ctheta/tristate.hpp"

namespace ctheta {

enum class SchemeVariant {
    kG1Const,  // tau in R1, recovers squared theta constants, r = 1
    kG1Func,   // (z, tau) in S1, squared theta function values, r = 2
    kG2Const,  // tau in R2, squared genus-2 theta constants, r = 3
};

// Decides membership in the scheme's reduced domain over the input balls:
//   R1: |Re tau| <= 1/2, |tau| >= 1, Im tau <= 2 (and Im tau > 0);
//   S1: tau in R1, |Re z| <= 1/8, |Im z| <= Im(tau)/8;
//   R2: |Re tau_ij| <= 1/2, 2|Im tau12| <= Im tau11 <= Im tau22,
//       |tau_jj| >= 1, Im tau11 <= 2, Im tau22 <= 8.
// All inequalities are closed, so exact inputs always decide; fat balls may
// come back indeterminate.
Tristate in_reduced_domain(SchemeVariant variant, const PeriodPoint& p);

// The theta quotients a scheme iterates on, all taken at tau/2:
//   kG1Const: { theta_01/theta_00 (0, tau/2) },
//   kG1Func:  the same followed by theta_01/theta_00 (z, tau/2),
//   kG2Const: theta_{0,b}/theta_{0,0} (0, tau/2) for b = 01, 10, 11.
struct ThetaQuotients {
    std::vector<ComplexBall> values;
};

// Certified constants of one scheme: the Newton bundle (already adjusted to
// powers of two) plus the starting precision, which doubles as the naive
// seed precision.
struct SchemeDescriptor {
    SchemeVariant variant = SchemeVariant::kG1Const;
    int r = 1;
    SchemeConstants constants;
    Precision seed_bits = 0;
};

const SchemeDescriptor& scheme_descriptor(SchemeVariant variant);

// The squared theta quotients produced by one duplication step from the
// point's quotients x (exactly the first terms every internal Borchardt mean
// is built from). Component order, with D = theta_00^2(0, tau/2) and
// E = theta_00(z, tau/2) theta_00(0, tau/2):
//   kG1Const: theta^2_{a,b}(0,tau)/D for (a,b) = 00, 01, 10;
//   kG1Func:  those three, then theta^2_{a,b}(z,tau)/E for 00, 01, 10, 11;
//   kG2Const: theta^2_{a,b}(0,tau)/D for the ten even characteristics in the
//             order 00|00, 00|01, 00|10, 00|11, 01|00, 01|10, 10|00, 10|01,
//             11|00, 11|11.
std::vector<ComplexBall> duplication_squared_quotients(SchemeVariant variant,
                                                       const std::vector<ComplexBall>& x,
                                                       Precision work);

// The analytic maps F. Inputs must lie within the certified basin radius of
// some Theta(point) with the point in the reduced domain; outputs are balls
// of radius <= 2^-p. Failures of the internal good-position or
// nonvanishing checks surface as OutsideBasin.
ComplexBall eval_F_g1const(const ComplexBall& x, Precision p);
std::array<ComplexBall, 2> eval_F_g1func(const std::array<ComplexBall, 2>& x, Precision p);
std::array<ComplexBall, 3> eval_F_g2const(const std::array<ComplexBall, 3>& x, Precision p);

// The same maps packaged for newton_refine.
EvaluatorContract scheme_contract(SchemeVariant variant);

// The exact right-hand side the Newton iteration solves against, rounded to
// exact dyadics from the point's midpoints at `bits` working precision:
// (tau), (tau, exp(2 pi i z^2/tau)), or (tau11, tau22, tau12^2 - tau11 tau22).
std::vector<ComplexBall> target_of(SchemeVariant variant, const PeriodPoint& p, Precision bits);

// Runs the full scheme at the point's midpoints: naive seed at seed_bits,
// Newton refinement against target_of, output quotients with radius
// <= 2^-target. Throws DomainError when the point cannot be certified inside
// the reduced domain; Newton-side failures propagate.
ThetaQuotients solve_quotients(SchemeVariant variant, const PeriodPoint& p, Precision target,
                               std::vector<NewtonTraceEntry>* trace = nullptr);

// Unwinds quotients into squared theta values via one more Borchardt mean:
//   kG1Const: theta^2_{a,b}(0, tau) for all four (a,b), the odd one exactly 0;
//   kG1Func:  theta^2_{a,b}(z, tau) for all four (a,b);
//   kG2Const: theta^2_{a,b}(0, tau) for the ten even characteristics.
// The quotients must be certified to target + 96 + log2(B3) bits or better
// (the slack feeds the extended mean, whose telescoping squares its working
// terms a few dozen times); the point is only consulted for a low-precision
// consistency check against the quotients (mismatch raises DomainError).
std::vector<std::pair<Characteristic, ComplexBall>> quotients_to_squared_thetas(
    SchemeVariant variant, const ThetaQuotients& q, const PeriodPoint& p, Precision target);

// solve_quotients and quotients_to_squared_thetas chained with the right
// intermediate precision: squared theta values with radius <= 2^-target.
std::vector<std::pair<Characteristic, ComplexBall>> newton_squared_thetas(
    SchemeVariant variant, const PeriodPoint& p, Precision target,
    std::vector<NewtonTraceEntry>* trace = nullptr);

// Finite-difference audit of the certified bound on the inverse map's
// Jacobian: for each sample point, estimates the sup-norm operator norm of
// dG at the scheme's target coordinates and compares it with the hard-wired
// bound B3. An estimate is an approximation, not an enclosure; the audit
// catches gross constant errors, it does not prove the bound.
struct JacobianSample {
    Dyadic estimate;
    Dyadic bound;
    bool pass = false;
};
std::vector<JacobianSample> jacobian_bound_check(SchemeVariant variant,
                                                 const std::vector<PeriodPoint>& samples);

// The full table of hard-wired constants (Newton bundles and Borchardt
// brackets per scheme) rendered as a JSON object, for external audit.
std::string scheme_constants_json();

}  // namespace ctheta

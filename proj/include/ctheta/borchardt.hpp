// Borchardt sequences and their means, the 2^g-variable generalization of the
// arithmetic-geometric mean. One step maps a tuple (s_b), b in (Z/2Z)^g, to
//
//   s'_b = 2^-g * sum_{b1 + b2 = b} t_{b1} t_{b2},   t_b^2 = s_b,
//
// so each step involves a choice of square roots; for g = 1 the step is
// exactly the AGM step (a, b) -> ((a+b)/2, sqrt(ab)) acting on squares. A
// step is "good" when the chosen roots fit in an open quarter plane seen
// from the origin. Iterating good steps converges quadratically to a common
// limit, the Borchardt mean. The extended variant carries a second tuple u
// through the same root choices, u'_b = 2^-g sum v_{b1} t_{b2} with
// v_b^2 = u_b, and its mean is the limit of (u_0^(n))^{2^n} suitably
// normalized. Both means extend analytically to small polydisks around a
// recorded sequence when the same square-root choices are followed, which is
// what makes them usable inside Newton iterations.
//
// All routines consume and produce complex balls; outputs contain the exact
// mathematical value whenever the inputs do.

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ctheta/ball.hpp"
#include "ctheta/tristate.hpp"

namespace ctheta {

// One term of a (possibly extended) Borchardt sequence: 2^g balls indexed by
// b in (Z/2Z)^g, plus a second tuple of the same shape for extended
// sequences. Entries must exclude zero whenever a step is to be taken.
struct BorchardtTerm {
    int g = 1;
    std::vector<ComplexBall> s;
    std::optional<std::vector<ComplexBall>> u;

    // Builds a term from 2 or 4 balls; the genus is inferred from the count.
    static BorchardtTerm plain(std::vector<ComplexBall> s_vals);
    static BorchardtTerm extended(std::vector<ComplexBall> u_vals, std::vector<ComplexBall> s_vals);

    bool is_extended() const { return u.has_value(); }
    void validate() const;
};

// The square-root choices of one recorded step: anchors t_b for the s-part
// and, in the extended case, v_b for the u-part. Each anchor squares back to
// the sequence value it was drawn from (within radii); anchors are stored at
// a modest fixed precision since they only disambiguate a binary choice.
struct SignStep {
    std::vector<ComplexBall> t;
    std::vector<ComplexBall> v;
};

struct SignPath {
    std::vector<SignStep> steps;
};

// A priori data describing how a recorded sequence converges: every step
// with index >= n0 is good, M0 bounds the starting moduli from above (and
// exceeds every later relevant modulus), m_n[n] bounds the moduli at step
// n < n0 from below, and m_inf is the lower bound that holds from step n0
// on. Extended sequences additionally record the disk D_rho(z0) that the
// s-part has reached by step n0, with 17 rho < |z0|.
struct BorchardtBounds {
    long n0 = 0;
    Dyadic M0;
    Dyadic m_inf;
    std::vector<Dyadic> m_n;
    std::optional<ComplexBall> z0;
    std::optional<Dyadic> rho_disk;

    bool has_disk() const { return z0.has_value(); }
    void validate() const;
};

// Optional diagnostics from mean_good: the certified relative disagreement
// eps = 4 max_b |s_b - s_0| / |s_0| observed at each step, in order. Useful
// for watching the quadratic contraction from outside.
struct MeanTrace {
    std::vector<Dyadic> eps;
};

// Decides whether every point tuple drawn from the balls sits inside some
// open quarter plane {r e^{i theta} : r > 0, alpha < theta < alpha + pi/2}.
// A finite set fits in such a quarter plane exactly when Re(x conj(y)) > 0
// for every pair of members, so the test reduces to ball products. Returns
// kFalse only when no point tuple fits, kIndeterminate when the radii are
// too fat to decide.
Tristate is_good_position(const std::vector<ComplexBall>& vals);

// Replays one step with recorded square-root choices. Each anchor must
// square back to the matching entry within `slack` (else BadSignPath); the
// actual roots are re-extracted at the working precision with sqrt_near
// against the anchors. A nonzero slack admits entries that drifted from the
// recorded sequence, as they do when a path is followed from a perturbed
// start. Entries that straddle zero raise DomainError.
BorchardtTerm step(const BorchardtTerm& t, const SignStep& anchors, Precision work,
                   const Dyadic& slack = Dyadic());

// Performs the unique good step. The roots of the s-part (and of the u-part,
// separately, when extended) are chosen in good position; this determines
// them up to one global sign, fixed by requiring the b = 0 root's argument
// to lie in (-pi/2, pi/2] (decided on the midpoint). Returns the next term
// together with the anchors that a later replay needs. Raises
// NotGoodPosition when a root tuple cannot be certified to fit in a quarter
// plane; the exception's `indeterminate` flag tells a retry at higher
// precision apart from a definite failure.
std::pair<BorchardtTerm, SignStep> step_good(const BorchardtTerm& t, Precision work);

// The Borchardt mean of the good-steps-only sequence starting at `start`
// (plain terms only), as a ball of radius <= 2^-target. Iterates step_good
// until the tuple is certified inside the quadratic-contraction region, then
// stops once the explicit tail estimate drops below the target. Working
// precision doubles automatically (a few times) when ball radii prevent
// certification.
ComplexBall mean_good(const BorchardtTerm& start, Precision target, MeanTrace* trace = nullptr);

// The extended Borchardt mean lambda(u, s) of the good-steps-only sequence
// starting at the extended term `start`, as a ball of radius <= 2^-target.
// `bounds` supplies the convergence data (m_inf, M0, optionally the disk);
// when no disk is supplied, or the supplied one cannot be certified on the
// input balls, a containing disk with 17 rho < |z0| is discovered at run
// time once the s-part has clustered enough. Certified violations of the
// bounds raise DomainError.
ComplexBall mean_ext_good(const BorchardtTerm& start, const BorchardtBounds& bounds, Precision target);

// The radius of the polydisk around a recorded first term on which the mean
// obtained by following the same sign choices stays well-defined and
// analytic. Rounded downward.
Dyadic radius_follow(const BorchardtBounds& bounds);

// Evaluates the sign-path-following mean at `start`, which must lie within
// radius_follow(bounds) of the recorded first term (reconstructed from the
// first step's anchors; violations raise OutOfRadius). The first n0 steps
// replay the recorded choices, after which only good steps remain and the
// run finishes with mean_good or mean_ext_good under the perturbed bounds
// (m_inf/2, M0 + rho). Extended means are anchored to the index origin, so
// the tail's value lam' is re-based as mu (lam'/mu)^{2^n0} before returning;
// in particular replayed sign choices that negate the u part propagate into
// the result exactly as they do in the limit definition.
ComplexBall mean_follow(const BorchardtTerm& start, const SignPath& path,
                        const BorchardtBounds& bounds, Precision target);

}  // namespace ctheta

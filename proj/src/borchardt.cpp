#include "ctheta/borchardt.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ctheta/errors.hpp"

namespace ctheta {

namespace {

// Ball products used by the quarter-plane test only disambiguate signs, so a
// short working precision keeps them cheap.
constexpr Precision kPositionBits = 64;

// Recording precision for sign-path anchors. An anchor only has to pin down
// which of two opposite roots was taken, with ample margin for the polydisk
// on which a path can be followed.
constexpr Precision kAnchorBits = 64;

constexpr long kMaxMeanSteps = 4096;
constexpr int kMaxRetries = 4;
// Consecutive non-improving contraction readings tolerated before a mean
// attempt gives up; healthy runs shrink eps every step.
constexpr int kStallLimit = 32;

int genus_for(size_t count) {
    if (count == 2) return 1;
    if (count == 4) return 2;
    throw std::invalid_argument("Borchardt tuples must have 2 or 4 entries");
}

bool is_exact_zero(const ComplexBall& b) {
    return b.is_exact() && b.re_mid().is_zero() && b.im_mid().is_zero();
}

// s'_b = 2^-g sum_{c} x_c y_{b xor c}; used with x = y = t for the main
// tuple and x = v, y = t for the extended one.
std::vector<ComplexBall> combine(const std::vector<ComplexBall>& x,
                                 const std::vector<ComplexBall>& y, int g, Precision work) {
    const size_t n = x.size();
    std::vector<ComplexBall> out(n);
    for (size_t b = 0; b < n; ++b) {
        ComplexBall acc;
        for (size_t c = 0; c < n; ++c) {
            acc = add(acc, mul(x[c], y[b ^ c], work), work);
        }
        out[b] = mul_pow2(acc, -g);
    }
    return out;
}

// A square root of `a` with canonical global sign: argument in (-pi/2,
// pi/2], decided on the midpoint. A ball that excludes zero misses at least
// one of the two real half-axes, so one of the two principal-branch
// evaluations below is always continuous on it.
ComplexBall canonical_root(const ComplexBall& a, Precision work) {
    if (!a.excludes_zero()) {
        throw DomainError("square root of a ball that straddles zero");
    }
    ComplexBall r;
    if (avoids_negative_axis(a)) {
        r = sqrt_principal(a, work);
    } else {
        r = mul_i(sqrt_principal(-a, work));
    }
    const int re_sign = r.re_mid().sign();
    if (re_sign < 0 || (re_sign == 0 && r.im_mid().sign() < 0)) {
        r = -r;
    }
    return r;
}

// The good root tuple of `vals`: canonical root at b = 0, the remaining
// roots on the same side as it, then a rigorous quarter-plane check of the
// whole tuple.
std::vector<ComplexBall> good_roots(const std::vector<ComplexBall>& vals, Precision work,
                                    const char* label) {
    std::vector<ComplexBall> roots(vals.size());
    roots[0] = canonical_root(vals[0], work);
    for (size_t b = 1; b < vals.size(); ++b) {
        if (!vals[b].excludes_zero()) {
            throw DomainError("square root of a ball that straddles zero");
        }
        try {
            roots[b] = sqrt_near(vals[b], roots[0], work);
        } catch (const AmbiguousBranch&) {
            // A root perpendicular to the b = 0 root (up to ball widths)
            // sits on the quarter-plane boundary, so the good tuple cannot
            // be certified at this precision.
            throw NotGoodPosition(std::string(label) +
                                      "-part root sits on the quarter-plane boundary",
                                  true);
        }
    }
    const Tristate ok = is_good_position(roots);
    if (ok != Tristate::kTrue) {
        throw NotGoodPosition(std::string(label) +
                                  "-part roots not certified inside a quarter plane",
                              ok == Tristate::kIndeterminate);
    }
    return roots;
}

std::vector<ComplexBall> replay_roots(const std::vector<ComplexBall>& vals,
                                      const std::vector<ComplexBall>& anchors, Precision work,
                                      const Dyadic& slack) {
    std::vector<ComplexBall> roots(vals.size());
    for (size_t b = 0; b < vals.size(); ++b) {
        if (!vals[b].excludes_zero()) {
            throw DomainError("square root of a ball that straddles zero");
        }
        if (!mul(anchors[b], anchors[b], kAnchorBits).inflate(slack).overlaps(vals[b])) {
            throw BadSignPath("recorded anchor does not square to the sequence value");
        }
        roots[b] = sqrt_near(vals[b], anchors[b], work);
    }
    return roots;
}

std::vector<ComplexBall> record_anchors(const std::vector<ComplexBall>& roots) {
    std::vector<ComplexBall> rec(roots.size());
    for (size_t b = 0; b < roots.size(); ++b) {
        rec[b] = roots[b].round_mid(kAnchorBits);
    }
    return rec;
}

// One mean_good attempt at a fixed working precision. Returns nullopt when
// the radii at this precision prevent certification (caller retries wider).
std::optional<ComplexBall> mean_good_attempt(const BorchardtTerm& start, Precision target,
                                             Precision work, MeanTrace* trace) {
    const Dyadic half = Dyadic(1).mul_pow2(-1);
    const Dyadic stop = Dyadic::pow2(-target - 1);
    BorchardtTerm term = start;
    Dyadic best_eps;
    bool have_best = false;
    int stalled = 0;
    for (long n = 0; n < kMaxMeanSteps; ++n) {
        const ComplexBall& s0 = term.s[0];
        const Dyadic low0 = s0.abs_lower();
        if (low0.sign() > 0) {
            Dyadic spread;
            Dyadic big;
            for (const ComplexBall& sb : term.s) {
                spread = std::max(spread, sub(sb, s0, kPositionBits).abs_upper());
                big = std::max(big, sb.abs_upper());
            }
            // eps over-approximates 4 max_b |s_b - s_0| / |s_0|; the tiny
            // bump keeps the contraction hypothesis |s_b - s_0| <
            // (eps/4)|s_0| strict even when the quotient is exact.
            const Dyadic eps =
                rnd::add_up(rnd::div_up(spread.mul_pow2(2), low0), Dyadic::pow2(-work - 8));
            if (trace) {
                trace->eps.push_back(eps);
            }
            // Input ball radii put a floor under eps that stepping cannot
            // lower; once eps stops improving the target is out of reach at
            // this working precision and stepping further only widens the
            // balls until the roots become ambiguous.
            if (!have_best || eps < best_eps) {
                best_eps = eps;
                have_best = true;
                stalled = 0;
            } else if (++stalled > kStallLimit) {
                return std::nullopt;
            }
            if (eps <= half) {
                // Once eps <= 1/2 the disagreement after k more steps is at
                // most (2/7)(7 eps/8)^{2^k} max_b |s_b|, and consecutive
                // first entries move by at most the current disagreement, so
                //   |mean - s_0| <= (2/7) max_b|s_b| sum_{k>=1} (7 eps/8)^k
                //                 = (2/7) max_b|s_b| (7 eps/8)/(1 - 7 eps/8).
                const Dyadic t7 = rnd::mul_up(eps, Dyadic(7)).mul_pow2(-3);
                const Dyadic denom = rnd::mul_down(Dyadic(1) - t7, Dyadic(7));
                const Dyadic encl = rnd::div_up(rnd::mul_up(big, t7).mul_pow2(1), denom);
                if (encl <= stop) {
                    if (s0.radius() <= stop) {
                        return s0.inflate(encl);
                    }
                    return std::nullopt;
                }
            }
        }
        term = step_good(term, work).first;
    }
    return std::nullopt;
}

// Disk around which the s-part of an extended sequence has clustered, with
// the step index at which containment was certified.
struct DiskCert {
    long j0 = -1;
    Dyadic rho;
    Dyadic z_abs_up;
    Dyadic z_abs_down;

    bool certified() const { return j0 >= 0; }
};

Dyadic dist_upper(const ComplexBall& a, const Dyadic& re, const Dyadic& im) {
    return rnd::add_up(rnd::hypot_up(a.re_mid() - re, a.im_mid() - im), a.radius());
}

// 17 rho < |z0| guarantees the relative cluster width needed for the
// quadratic contraction of good steps inside the disk.
bool disk_condition(const Dyadic& rho, const Dyadic& z_abs_down) {
    return rnd::mul_up(rho, Dyadic(17)) < z_abs_down;
}

void try_certify_disk(const std::vector<ComplexBall>& s, const BorchardtBounds& bounds, long n,
                      DiskCert& disk) {
    if (n == 0 && bounds.has_disk()) {
        // The pack's center is a ball; shifting to its midpoint costs at
        // most the center radius, which is folded into rho.
        const ComplexBall& z = *bounds.z0;
        const Dyadic rho_eff = rnd::add_up(*bounds.rho_disk, z.radius());
        bool inside = true;
        for (const ComplexBall& sb : s) {
            if (!(dist_upper(sb, z.re_mid(), z.im_mid()) <= rho_eff)) {
                inside = false;
                break;
            }
        }
        if (inside && disk_condition(rho_eff, z.abs_mid_lower())) {
            disk.j0 = 0;
            disk.rho = rho_eff;
            disk.z_abs_up = z.abs_mid_upper();
            disk.z_abs_down = z.abs_mid_lower();
            return;
        }
    }
    // Runtime discovery: center on the first entry's midpoint and cover the
    // whole tuple.
    const Dyadic z_re = s[0].re_mid();
    const Dyadic z_im = s[0].im_mid();
    Dyadic rho;
    for (const ComplexBall& sb : s) {
        rho = std::max(rho, dist_upper(sb, z_re, z_im));
    }
    const Dyadic z_abs_down = rnd::hypot_down(z_re, z_im);
    if (disk_condition(rho, z_abs_down)) {
        disk.j0 = n;
        disk.rho = rho;
        disk.z_abs_up = rnd::hypot_up(z_re, z_im);
        disk.z_abs_down = z_abs_down;
    }
}

// Upper bound on the relative error committed by truncating the extended
// mean's correction product at step index nu: the factors q_{j+1} satisfy
// |q_{j+1} - 1| <= B' 2^{-2^{j - j0 - 1}}, and for nu >= j0 + 3 the
// resulting product tail is below exp(h) - 1 <= 4 B' 2^nu 2^{-2^{nu-j0-1}}.
Dyadic ext_tail_bound(const Dyadic& bprime, long nu, long j0) {
    const long shift = nu - j0 - 1;
    if (shift > 60) {
        // 2^{-2^60} is far below any representable target; the remaining
        // factors are exact zero-width in every practical sense.
        return Dyadic::pow2(-(1L << 60));
    }
    return rnd::mul_up(bprime, Dyadic::pow2(nu + 2)).mul_pow2(-(1L << shift));
}

std::optional<ComplexBall> mean_ext_attempt(const BorchardtTerm& start,
                                            const BorchardtBounds& bounds, Precision target,
                                            Precision work) {
    BorchardtTerm term = start;
    DiskCert disk;
    Dyadic bprime;
    long n_stop = -1;
    long n = 0;
    while (true) {
        if (!disk.certified()) {
            try_certify_disk(term.s, bounds, n, disk);
            if (disk.certified()) {
                // Convergence constants over the certified configuration.
                // Larger M and smaller m only weaken the tail bound, so the
                // observed starting moduli are folded in for safety.
                Dyadic big = std::max(std::max(bounds.M0, Dyadic(1)),
                                      rnd::add_up(disk.z_abs_up, disk.rho));
                Dyadic small = std::min(std::min(bounds.m_inf, Dyadic(1)),
                                        rnd::sub_down(disk.z_abs_down, disk.rho));
                for (const ComplexBall& b : start.s) {
                    big = std::max(big, b.abs_upper());
                    small = std::min(small, b.abs_lower());
                }
                for (const ComplexBall& b : *start.u) {
                    big = std::max(big, b.abs_upper());
                    small = std::min(small, b.abs_lower());
                }
                if (small.sign() <= 0) {
                    throw DomainError("extended mean requires entries bounded away from zero");
                }
                const Dyadic bb = rnd::mul_up(
                    rnd::mul_up(Dyadic(5).mul_pow2(-2), rnd::sqrt_up(rnd::div_up(big, small))),
                    disk.z_abs_up);
                bprime = rnd::add_up(disk.z_abs_up.mul_pow2(1),
                                     rnd::div_up(rnd::add_up(rnd::mul_up(big, bb).mul_pow2(1),
                                                             rnd::mul_up(bb, bb)),
                                                 rnd::mul_down(small, small)));
                long nu = disk.j0 + 3;
                const Dyadic cutoff = Dyadic::pow2(-target - 2);
                while (ext_tail_bound(bprime, nu, disk.j0) > cutoff && nu < disk.j0 + 200) {
                    ++nu;
                }
                n_stop = nu;
            }
        }
        if (n_stop >= 0 && n == n_stop) {
            break;
        }
        if (n >= kMaxMeanSteps) {
            return std::nullopt;
        }
        term = step_good(term, work).first;
        ++n;
    }

    // Exact telescoping: lambda = mu (u_0^(n)/mu)^{2^n} prod_{j>=n} q_{j+1}^{2^j}
    // with q_{j+1} = (u_0^(j+1))^2 / (u_0^(j) mu); the product tail is the
    // certified relative correction.
    const Precision wf = target + 2 * n + 64;
    const ComplexBall mu = mean_good(BorchardtTerm::plain(term.s), target + 2 * n + 32, nullptr);
    const ComplexBall& u0 = (*term.u)[0];
    if (!mu.excludes_zero() || !u0.excludes_zero()) {
        return std::nullopt;
    }
    ComplexBall pw = div(u0, mu, wf);
    for (long k = 0; k < n; ++k) {
        pw = mul(pw, pw, wf);
    }
    const Dyadic tail = ext_tail_bound(bprime, n, disk.j0);
    const ComplexBall lam =
        mul(mul(mu, pw, wf), ComplexBall(Dyadic(1), Dyadic(), tail), wf);
    if (lam.radius() > Dyadic::pow2(-target)) {
        return std::nullopt;
    }
    return lam;
}

void check_follow_distance(const std::vector<ComplexBall>& vals,
                           const std::vector<ComplexBall>& anchors, const Dyadic& rho) {
    if (vals.size() != anchors.size()) {
        throw std::invalid_argument("sign path anchor count does not match the term");
    }
    for (size_t b = 0; b < vals.size(); ++b) {
        const ComplexBall rec = mul(anchors[b], anchors[b], kAnchorBits);
        const Dyadic d = rnd::add_up(
            rnd::hypot_up(vals[b].re_mid() - rec.re_mid(), vals[b].im_mid() - rec.im_mid()),
            vals[b].radius() + rec.radius());
        if (!(d < rho)) {
            throw OutOfRadius("start lies outside the followable polydisk of the recorded path");
        }
    }
}

}  // namespace

BorchardtTerm BorchardtTerm::plain(std::vector<ComplexBall> s_vals) {
    BorchardtTerm t;
    t.g = genus_for(s_vals.size());
    t.s = std::move(s_vals);
    return t;
}

BorchardtTerm BorchardtTerm::extended(std::vector<ComplexBall> u_vals,
                                      std::vector<ComplexBall> s_vals) {
    BorchardtTerm t;
    t.g = genus_for(s_vals.size());
    t.s = std::move(s_vals);
    if (u_vals.size() != t.s.size()) {
        throw std::invalid_argument("extended tuple sizes must match");
    }
    t.u = std::move(u_vals);
    return t;
}

void BorchardtTerm::validate() const {
    if (g != 1 && g != 2) {
        throw std::invalid_argument("genus must be 1 or 2");
    }
    if (s.size() != (size_t{1} << g)) {
        throw std::invalid_argument("tuple size must be 2^g");
    }
    if (u && u->size() != s.size()) {
        throw std::invalid_argument("extended tuple sizes must match");
    }
}

void BorchardtBounds::validate() const {
    if (n0 < 0) {
        throw std::invalid_argument("n0 must be nonnegative");
    }
    if ((long)m_n.size() != n0) {
        throw std::invalid_argument("need exactly one lower bound per step before n0");
    }
    if (M0.sign() <= 0) {
        throw std::invalid_argument("M0 must be positive");
    }
    if (m_inf.sign() <= 0 || m_inf > M0) {
        throw std::invalid_argument("need 0 < m_inf <= M0");
    }
    for (const Dyadic& m : m_n) {
        if (m.sign() <= 0 || m > M0) {
            throw std::invalid_argument("need 0 < m_n <= M0");
        }
    }
    if (z0.has_value() != rho_disk.has_value()) {
        throw std::invalid_argument("a disk needs both center and radius");
    }
    if (z0.has_value()) {
        if (rho_disk->sign() < 0) {
            throw std::invalid_argument("disk radius must be nonnegative");
        }
        if (!disk_condition(*rho_disk, z0->abs_lower())) {
            throw std::invalid_argument("disk must satisfy 17 rho < |z0|");
        }
    }
}

Tristate is_good_position(const std::vector<ComplexBall>& vals) {
    for (const ComplexBall& v : vals) {
        if (is_exact_zero(v)) {
            return Tristate::kFalse;
        }
    }
    bool all_positive = true;
    for (size_t i = 0; i < vals.size(); ++i) {
        for (size_t j = i; j < vals.size(); ++j) {
            const ComplexBall p = mul(vals[i], vals[j].conj(), kPositionBits);
            if (i != j && p.re_upper().sign() <= 0) {
                return Tristate::kFalse;
            }
            if (p.re_lower().sign() <= 0) {
                all_positive = false;
            }
        }
    }
    return all_positive ? Tristate::kTrue : Tristate::kIndeterminate;
}

BorchardtTerm step(const BorchardtTerm& t, const SignStep& anchors, Precision work,
                   const Dyadic& slack) {
    t.validate();
    if (anchors.t.size() != t.s.size() ||
        (t.is_extended() ? anchors.v.size() != t.s.size() : !anchors.v.empty())) {
        throw std::invalid_argument("anchor count does not match the term");
    }
    const std::vector<ComplexBall> tt = replay_roots(t.s, anchors.t, work, slack);
    BorchardtTerm next;
    next.g = t.g;
    next.s = combine(tt, tt, t.g, work);
    if (t.is_extended()) {
        const std::vector<ComplexBall> vv = replay_roots(*t.u, anchors.v, work, slack);
        next.u = combine(vv, tt, t.g, work);
    }
    return next;
}

std::pair<BorchardtTerm, SignStep> step_good(const BorchardtTerm& t, Precision work) {
    t.validate();
    const std::vector<ComplexBall> tt = good_roots(t.s, work, "s");
    SignStep rec;
    rec.t = record_anchors(tt);
    BorchardtTerm next;
    next.g = t.g;
    next.s = combine(tt, tt, t.g, work);
    if (t.is_extended()) {
        const std::vector<ComplexBall> vv = good_roots(*t.u, work, "u");
        rec.v = record_anchors(vv);
        next.u = combine(vv, tt, t.g, work);
    }
    return {next, rec};
}

ComplexBall mean_good(const BorchardtTerm& start, Precision target, MeanTrace* trace) {
    start.validate();
    if (start.is_extended()) {
        throw std::invalid_argument("mean_good expects a plain term");
    }
    if (target < 1) {
        throw std::invalid_argument("target precision must be positive");
    }
    Precision work = target + 64;
    for (int attempt = 0;; ++attempt) {
        try {
            if (trace) {
                trace->eps.clear();
            }
            std::optional<ComplexBall> out = mean_good_attempt(start, target, work, trace);
            if (out) {
                return *out;
            }
        } catch (const NotGoodPosition& e) {
            if (!e.indeterminate || attempt == kMaxRetries) {
                throw;
            }
        } catch (const AmbiguousBranch&) {
            if (attempt == kMaxRetries) {
                throw;
            }
        }
        if (attempt == kMaxRetries) {
            throw PrecisionError("Borchardt mean failed to certify within the retry budget");
        }
        work *= 2;
    }
}

ComplexBall mean_ext_good(const BorchardtTerm& start, const BorchardtBounds& bounds,
                          Precision target) {
    start.validate();
    bounds.validate();
    if (!start.is_extended()) {
        throw std::invalid_argument("mean_ext_good expects an extended term");
    }
    if (target < 1) {
        throw std::invalid_argument("target precision must be positive");
    }
    // Certified bound violations on the inputs; straddling balls pass.
    for (const ComplexBall& ub : *start.u) {
        if (ub.abs_upper() <= bounds.m_inf) {
            throw DomainError("u-part modulus is certified at or below m_inf");
        }
        if (ub.abs_lower() >= bounds.M0) {
            throw DomainError("u-part modulus is certified at or above M0");
        }
    }
    for (const ComplexBall& sb : start.s) {
        if (sb.abs_lower() >= bounds.M0) {
            throw DomainError("s-part modulus is certified at or above M0");
        }
    }
    Precision work = target + 96;
    for (int attempt = 0;; ++attempt) {
        try {
            std::optional<ComplexBall> out = mean_ext_attempt(start, bounds, target, work);
            if (out) {
                return *out;
            }
        } catch (const NotGoodPosition& e) {
            if (!e.indeterminate || attempt == kMaxRetries) {
                throw;
            }
        } catch (const AmbiguousBranch&) {
            if (attempt == kMaxRetries) {
                throw;
            }
        } catch (const PrecisionError&) {
            // The inner plain mean runs at target + 2n + 32 bits against
            // terms whose radii are floored by this attempt's working
            // precision; widening the steps can fix that, input radii can't
            // be fixed, so give the ladder its chance and then give up.
            if (attempt == kMaxRetries) {
                throw;
            }
        }
        if (attempt == kMaxRetries) {
            throw PrecisionError("extended Borchardt mean failed to certify within the retry budget");
        }
        work *= 2;
    }
}

Dyadic radius_follow(const BorchardtBounds& bounds) {
    bounds.validate();
    const auto m_at = [&bounds](long k) -> const Dyadic& {
        return k == bounds.n0 ? bounds.m_inf : bounds.m_n[(size_t)k];
    };
    Dyadic best;
    if (bounds.has_disk()) {
        // Extended shape: the k-th candidate is (m_k/2) (m_k/(2 M0 + m_k))^{k/2}.
        for (long k = 0; k <= bounds.n0; ++k) {
            const Dyadic& mk = m_at(k);
            const Dyadic f =
                rnd::sqrt_down(rnd::div_down(mk, rnd::add_up(bounds.M0.mul_pow2(1), mk)));
            Dyadic term = mk.mul_pow2(-1);
            for (long j = 0; j < k; ++j) {
                term = rnd::mul_down(term, f);
            }
            best = k == 0 ? term : std::min(best, term);
        }
    } else {
        // Plain shape: the k-th candidate is (m_k/2) prod_{j<k} sqrt(m_j/(2 M0 + m_j)).
        Dyadic prefix(1);
        for (long k = 0; k <= bounds.n0; ++k) {
            const Dyadic& mk = m_at(k);
            const Dyadic term = rnd::mul_down(mk.mul_pow2(-1), prefix);
            best = k == 0 ? term : std::min(best, term);
            if (k < bounds.n0) {
                prefix = rnd::mul_down(
                    prefix, rnd::sqrt_down(rnd::div_down(mk, rnd::add_up(bounds.M0.mul_pow2(1), mk))));
            }
        }
    }
    return best;
}

ComplexBall mean_follow(const BorchardtTerm& start, const SignPath& path,
                        const BorchardtBounds& bounds, Precision target) {
    start.validate();
    bounds.validate();
    if ((long)path.steps.size() < bounds.n0) {
        throw std::invalid_argument("sign path is shorter than the recorded bad-step count");
    }
    const Dyadic rho = radius_follow(bounds);
    if (!path.steps.empty()) {
        check_follow_distance(start.s, path.steps[0].t, rho);
        if (start.is_extended()) {
            check_follow_distance(*start.u, path.steps[0].v, rho);
        }
    }
    // The finishing mean can only certify down to the replayed term's ball
    // radii, and how much headroom it needs below the target depends on the
    // step count it discovers at runtime. Rather than guess, replay
    // generously and redo the replay with doubled working precision when the
    // finish still reports a precision failure.
    Precision work = target + 2 * bounds.n0 + 256;
    for (int attempt = 0;; ++attempt) {
        try {
            BorchardtTerm term = start;
            for (long k = 0; k < bounds.n0; ++k) {
                // Inside the followable polydisk the n-th followed term
                // stays within m_n/2 of the recorded one, which is the slack
                // the anchor-square check has to absorb.
                term =
                    step(term, path.steps[(size_t)k], work, bounds.m_n[(size_t)k].mul_pow2(-1));
            }
            if (!start.is_extended()) {
                return mean_good(term, target);
            }
            // After the replayed steps the followed sequence obeys the
            // recorded pack with the perturbation margins folded in.
            BorchardtBounds after;
            after.n0 = 0;
            after.M0 = rnd::add_up(bounds.M0, rho);
            after.m_inf = bounds.m_inf.mul_pow2(-1);
            if (bounds.n0 == 0) {
                return mean_ext_good(term, after, target);
            }
            // The extended mean is anchored to the index origin: the limit
            // of (u_0^(n)/mu)^{2^n} taken from the tail recovers the
            // original's value only after re-raising to 2^{n0}. With lam'
            // the tail's mean, lam = mu (lam'/mu)^{2^{n0}}.
            const Precision wf = target + 2 * bounds.n0 + 64;
            const ComplexBall tail_lam =
                mean_ext_good(term, after, target + 2 * bounds.n0 + 32);
            const ComplexBall mu =
                mean_good(BorchardtTerm::plain(term.s), target + 2 * bounds.n0 + 32);
            if (!mu.excludes_zero()) {
                throw PrecisionError("followed mean could not separate mu from zero");
            }
            ComplexBall q = div(tail_lam, mu, wf);
            for (long k = 0; k < bounds.n0; ++k) {
                q = mul(q, q, wf);
            }
            return mul(mu, q, wf);
        } catch (const PrecisionError&) {
            if (attempt + 1 >= kMaxRetries) {
                throw;
            }
            work *= 2;
        }
    }
}

}  // namespace ctheta

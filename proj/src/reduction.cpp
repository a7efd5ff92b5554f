#include "ctheta/reduction.hpp"

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ctheta/errors.hpp"
#include "ctheta/tristate.hpp"

namespace ctheta {

namespace {

constexpr int kIterCap = 1000;
constexpr Precision kWorkCap = 1 << 15;

ComplexBall exact_int(const mpz_class& v) { return ComplexBall(Dyadic(v, 0)); }

// Real ball holding the imaginary part of b.
ComplexBall im_part(const ComplexBall& b) {
    return ComplexBall(b.im_mid(), Dyadic(), b.radius());
}

// Certified |Re| <= bound for a ball, treated as a closed condition.
bool abs_re_within(const ComplexBall& b, const Dyadic& bound) {
    return rnd::add_up(b.re_mid().abs(), b.radius()) <= bound;
}

// ---------------------------------------------------------------------------
// Integer symplectic bookkeeping

using IMat = std::vector<mpz_class>;  // row-major square matrix

IMat identity(int n) {
    IMat m(n * n, mpz_class(0));
    for (int i = 0; i < n; ++i) m[i * n + i] = 1;
    return m;
}

bool is_identity(const IMat& m, int n) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (m[i * n + j] != (i == j ? 1 : 0)) return false;
    return true;
}

IMat imul(const IMat& a, const IMat& b, int n) {
    IMat r(n * n, mpz_class(0));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) r[i * n + j] += a[i * n + k] * b[k * n + j];
    return r;
}

// 2x2 complex ball matrices for the genus-2 action.
struct BallMat2 {
    ComplexBall a, b, c, d;
};

BallMat2 mat_mul(const BallMat2& x, const BallMat2& y, Precision w) {
    return {add(mul(x.a, y.a, w), mul(x.b, y.c, w), w),
            add(mul(x.a, y.b, w), mul(x.b, y.d, w), w),
            add(mul(x.c, y.a, w), mul(x.d, y.c, w), w),
            add(mul(x.c, y.b, w), mul(x.d, y.d, w), w)};
}

BallMat2 mat_inv(const BallMat2& x, Precision w) {
    const ComplexBall det = sub(mul(x.a, x.d, w), mul(x.b, x.c, w), w);
    if (!det.excludes_zero()) {
        throw DomainError("singular 2x2 block in symplectic action");
    }
    return {div(x.d, det, w), div(-x.b, det, w), div(-x.c, det, w), div(x.a, det, w)};
}

BallMat2 block_of(const std::vector<mpz_class>& gamma, int row0, int col0) {
    auto at = [&](int i, int j) { return exact_int(gamma[i * 4 + j]); };
    return {at(row0, col0), at(row0, col0 + 1), at(row0 + 1, col0), at(row0 + 1, col0 + 1)};
}

BallMat2 affine(const BallMat2& coef, const BallMat2& tau, const BallMat2& cst, Precision w) {
    const BallMat2 p = mat_mul(coef, tau, w);
    return {add(p.a, cst.a, w), add(p.b, cst.b, w), add(p.c, cst.c, w), add(p.d, cst.d, w)};
}

}  // namespace

bool is_symplectic(const std::vector<mpz_class>& m, int genus) {
    const int g = genus;
    const int n = 2 * g;
    if (m.size() != static_cast<size_t>(n) * n) {
        return false;
    }
    // (M^T J M)_{ij} = sum_{k<g} M_{ki} M_{k+g,j} - M_{k+g,i} M_{kj}.
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            mpz_class acc = 0;
            for (int k = 0; k < g; ++k) {
                acc += m[k * n + i] * m[(k + g) * n + j];
                acc -= m[(k + g) * n + i] * m[k * n + j];
            }
            mpz_class want = 0;
            if (j == i + g) want = 1;
            if (i == j + g) want = -1;
            if (acc != want) {
                return false;
            }
        }
    }
    return true;
}

ComplexBall apply_gamma_g1(const std::vector<mpz_class>& gamma, const ComplexBall& tau,
                           Precision work) {
    if (gamma.size() != 4) {
        throw std::invalid_argument("genus-1 gamma must be 2x2");
    }
    const ComplexBall num =
        add(mul_dyadic(tau, Dyadic(gamma[0], 0), work), exact_int(gamma[1]), work);
    const ComplexBall den =
        add(mul_dyadic(tau, Dyadic(gamma[2], 0), work), exact_int(gamma[3]), work);
    if (!den.excludes_zero()) {
        throw DomainError("symplectic action denominator overlaps zero");
    }
    return div(num, den, work);
}

std::array<ComplexBall, 3> apply_gamma_g2(const std::vector<mpz_class>& gamma,
                                          const ComplexBall& t11, const ComplexBall& t12,
                                          const ComplexBall& t22, Precision work) {
    if (gamma.size() != 16) {
        throw std::invalid_argument("genus-2 gamma must be 4x4");
    }
    const BallMat2 tau = {t11, t12, t12, t22};
    const BallMat2 num = affine(block_of(gamma, 0, 0), tau, block_of(gamma, 0, 2), work);
    const BallMat2 den = affine(block_of(gamma, 2, 0), tau, block_of(gamma, 2, 2), work);
    const BallMat2 r = mat_mul(num, mat_inv(den, work), work);
    return {r.a, r.b, r.d};
}

std::array<ComplexBall, 3> apply_ladder(const std::vector<LadderRung>& ladder,
                                        const std::array<ComplexBall, 3>& tau, Precision work) {
    std::array<ComplexBall, 3> t = tau;
    for (const LadderRung& rung : ladder) {
        switch (rung.kind) {
            case RungKind::kD1:
                t = {mul_pow2(t[0], -1), mul_pow2(t[1], -1), mul_pow2(t[2], -1)};
                break;
            case RungKind::kD2:
                t = {mul_pow2(t[0], 1), t[1], mul_pow2(t[2], -1)};
                break;
            case RungKind::kRealShift:
                t = {add(t[0], ComplexBall(Dyadic(rung.b11)), work),
                     add(t[1], ComplexBall(Dyadic(rung.b12)), work),
                     add(t[2], ComplexBall(Dyadic(rung.b22)), work)};
                break;
        }
    }
    return t;
}

std::string ReductionCertificate::to_json() const {
    nlohmann::json j;
    j["genus"] = genus;
    nlohmann::json g = nlohmann::json::array();
    for (const auto& e : gamma) g.push_back(e.get_str());
    j["gamma"] = std::move(g);
    j["z_shift"] = {z_shift[0].get_str(), z_shift[1].get_str()};
    nlohmann::json rungs = nlohmann::json::array();
    for (const LadderRung& r : dup_ladder) {
        nlohmann::json e;
        switch (r.kind) {
            case RungKind::kD1:
                e["kind"] = "D1";
                break;
            case RungKind::kD2:
                e["kind"] = "D2";
                break;
            case RungKind::kRealShift:
                e["kind"] = "real_shift";
                e["b"] = {r.b11, r.b12, r.b22};
                break;
        }
        rungs.push_back(std::move(e));
    }
    j["ladder"] = std::move(rungs);
    j["signs"] = signs;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Genus 1

ReducedG1 reduce_g1(const ComplexBall& tau) {
    if (!(rnd::sub_down(tau.im_mid(), tau.radius()).sign() > 0)) {
        throw DomainError("reduce_g1: Im tau must be certifiably positive");
    }
    const Dyadic half = Dyadic(1).mul_pow2(-1);
    for (Precision work = 128;; work *= 2) {
        IMat m = identity(2);
        ComplexBall t = tau;
        bool settled = false;
        for (int iter = 0; iter < kIterCap; ++iter) {
            // Shift only when the midpoint is strictly outside the strip, so
            // a midpoint sitting exactly on |Re| = 1/2 cannot oscillate.
            if (t.re_mid().abs() > half) {
                const mpz_class r = t.re_mid().round_nearest_int();
                t = sub(t, exact_int(r), work);
                m = imul({mpz_class(1), mpz_class(-r), mpz_class(0), mpz_class(1)}, m, 2);
            }
            if (t.abs_lower() >= Dyadic(1)) {
                settled = true;
                break;
            }
            if (t.abs_upper() < Dyadic(1)) {
                t = div(ComplexBall(Dyadic(-1)), t, work);
                m = imul({mpz_class(0), mpz_class(-1), mpz_class(1), mpz_class(0)}, m, 2);
                continue;
            }
            // The ball straddles the unit circle; retry at higher precision.
            break;
        }
        if (settled) {
            // Re-derive the output from the exact matrix so the radius does
            // not carry the whole iteration history. The identity case keeps
            // the input ball untouched, which matters for exact inputs on
            // the boundary of the domain.
            const ComplexBall out = is_identity(m, 2) ? tau : apply_gamma_g1(m, tau, work);
            if (abs_re_within(out, half) && out.abs_lower() >= Dyadic(1)) {
                ReducedG1 res;
                res.tau = out;
                res.cert.genus = 1;
                res.cert.gamma = std::move(m);
                return res;
            }
        }
        if (work >= kWorkCap) {
            throw PrecisionError(
                "reduce_g1: fundamental-domain boundary undecidable at this input radius");
        }
    }
}

// ---------------------------------------------------------------------------
// Genus 2

namespace {

// Symplectic embedding of U in GL2(Z) acting by tau -> U^T tau U. The right
// diagonal block carries U^{-1} = adjugate(U) / det(U) with det(U) = +-1.
IMat embed_gl2(const mpz_class& u00, const mpz_class& u01, const mpz_class& u10,
               const mpz_class& u11) {
    const mpz_class det = u00 * u11 - u01 * u10;
    return {u00,          u10,          mpz_class(0),          mpz_class(0),
            u01,          u11,          mpz_class(0),          mpz_class(0),
            mpz_class(0), mpz_class(0), mpz_class(det * u11),  mpz_class(-det * u10),
            mpz_class(0), mpz_class(0), mpz_class(-det * u01), mpz_class(det * u00)};
}

IMat embed_shift(const mpz_class& b11, const mpz_class& b12, const mpz_class& b22) {
    return {mpz_class(1), mpz_class(0), b11,          b12,
            mpz_class(0), mpz_class(1), b12,          b22,
            mpz_class(0), mpz_class(0), mpz_class(1), mpz_class(0),
            mpz_class(0), mpz_class(0), mpz_class(0), mpz_class(1)};
}

struct Gottschling {
    IMat gamma;
    long c[4];  // lower-left block, row-major
    long d[4];  // lower-right block, row-major
};

// The nineteen boundary inversions of the genus-2 fundamental domain: two
// partial inversions enforcing |tau11| >= 1 and |tau22| >= 1, plus the full
// inversions tau -> -(tau + S)^{-1} for the seventeen symmetric integer S
// from Gottschling's description of the domain. Each enforces
// |det(C tau + D)| >= 1 for its lower block pair.
const std::vector<Gottschling>& gottschling_set() {
    static const std::vector<Gottschling> set = [] {
        std::vector<Gottschling> v;
        v.push_back({{mpz_class(0), mpz_class(0), mpz_class(1), mpz_class(0),
                      mpz_class(0), mpz_class(1), mpz_class(0), mpz_class(0),
                      mpz_class(-1), mpz_class(0), mpz_class(0), mpz_class(0),
                      mpz_class(0), mpz_class(0), mpz_class(0), mpz_class(1)},
                     {-1, 0, 0, 0},
                     {0, 0, 0, 1}});
        v.push_back({{mpz_class(1), mpz_class(0), mpz_class(0), mpz_class(0),
                      mpz_class(0), mpz_class(0), mpz_class(0), mpz_class(1),
                      mpz_class(0), mpz_class(0), mpz_class(1), mpz_class(0),
                      mpz_class(0), mpz_class(-1), mpz_class(0), mpz_class(0)},
                     {0, 0, 0, -1},
                     {1, 0, 0, 0}});
        auto add_s = [&v](long s11, long s12, long s22) {
            v.push_back({{mpz_class(0), mpz_class(0), mpz_class(-1), mpz_class(0),
                          mpz_class(0), mpz_class(0), mpz_class(0), mpz_class(-1),
                          mpz_class(1), mpz_class(0), mpz_class(s11), mpz_class(s12),
                          mpz_class(0), mpz_class(1), mpz_class(s12), mpz_class(s22)},
                         {1, 0, 0, 1},
                         {s11, s12, s12, s22}});
        };
        for (long d1 : {-1L, 0L, 1L})
            for (long d2 : {-1L, 0L, 1L}) add_s(d1, 0, d2);
        add_s(0, 1, 0);
        add_s(1, 1, 0);
        add_s(0, 1, 1);
        add_s(1, 1, 1);
        add_s(0, -1, 0);
        add_s(-1, -1, 0);
        add_s(0, -1, -1);
        add_s(-1, -1, -1);
        return v;
    }();
    return set;
}

ComplexBall det_lower_blocks(const Gottschling& g, const ComplexBall& t11, const ComplexBall& t12,
                             const ComplexBall& t22, Precision w) {
    // Rows of C tau + D, with tau = [[t11, t12], [t12, t22]].
    auto entry = [&](const long* crow, const ComplexBall& x, const ComplexBall& y, long dval) {
        return add(add(mul_si(x, crow[0], w), mul_si(y, crow[1], w), w),
                   ComplexBall(Dyadic(dval)), w);
    };
    const ComplexBall a = entry(g.c, t11, t12, g.d[0]);
    const ComplexBall b = entry(g.c, t12, t22, g.d[1]);
    const ComplexBall c = entry(g.c + 2, t11, t12, g.d[2]);
    const ComplexBall d = entry(g.c + 2, t12, t22, g.d[3]);
    return sub(mul(a, d, w), mul(b, c, w), w);
}

struct G2State {
    ComplexBall t11, t12, t22;
};

G2State act(const IMat& gamma, const G2State& s, Precision w) {
    const auto r = apply_gamma_g2(gamma, s.t11, s.t12, s.t22, w);
    return {r[0], r[1], r[2]};
}

// Nearest integer to a/b for dyadics with b > 0, used for midpoint decisions.
mpz_class round_quotient(const Dyadic& a, const Dyadic& b) {
    const Dyadic q = rnd::div_up(a.abs(), b);
    mpz_class r = q.round_nearest_int();
    if (a.sign() < 0) r = -r;
    return r;
}

}  // namespace

ReducedG2 reduce_g2(const ComplexBall& t11, const ComplexBall& t12, const ComplexBall& t22) {
    const ComplexBall y11 = im_part(t11);
    const ComplexBall y12 = im_part(t12);
    const ComplexBall y22 = im_part(t22);
    const ComplexBall ydet = sub(mul(y11, y22, 96), mul(y12, y12, 96), 96);
    if (!(y11.re_lower().sign() > 0) || !(ydet.re_lower().sign() > 0)) {
        throw DomainError("reduce_g2: Im tau must be certifiably positive definite");
    }
    const Dyadic half = Dyadic(1).mul_pow2(-1);
    for (Precision work = 192;; work *= 2) {
        IMat m = identity(4);
        G2State s = {t11, t12, t22};
        bool settled = false;
        for (int iter = 0; iter < kIterCap; ++iter) {
            bool changed = false;
            // Lagrange reduction of the imaginary part. Decisions come from
            // midpoints with strict comparisons, so boundary configurations
            // stay put; everything is re-certified once the loop settles.
            for (int inner = 0; inner < 64; ++inner) {
                const Dyadic n12 = s.t12.im_mid();
                const Dyadic n11 = s.t11.im_mid();
                if (n11.sign() <= 0) {
                    break;
                }
                bool stepped = false;
                if (n12.abs().mul_pow2(1) > n11) {
                    const mpz_class q = round_quotient(n12, n11);
                    if (q != 0) {
                        const IMat u = embed_gl2(1, mpz_class(-q), 0, 1);
                        s = act(u, s, work);
                        m = imul(u, m, 4);
                        changed = stepped = true;
                    }
                }
                if (s.t22.im_mid() < s.t11.im_mid()) {
                    const IMat u = embed_gl2(0, -1, 1, 0);
                    s = act(u, s, work);
                    m = imul(u, m, 4);
                    changed = stepped = true;
                }
                if (!stepped) {
                    break;
                }
            }
            // Integer real shifts, again only for midpoints strictly outside
            // the closed strip.
            mpz_class r11 = 0, r12 = 0, r22 = 0;
            if (s.t11.re_mid().abs() > half) r11 = s.t11.re_mid().round_nearest_int();
            if (s.t12.re_mid().abs() > half) r12 = s.t12.re_mid().round_nearest_int();
            if (s.t22.re_mid().abs() > half) r22 = s.t22.re_mid().round_nearest_int();
            if (r11 != 0 || r12 != 0 || r22 != 0) {
                const IMat u = embed_shift(-r11, -r12, -r22);
                s = act(u, s, work);
                m = imul(u, m, 4);
                changed = true;
            }
            // Apply the boundary inversion with the smallest certified
            // |det(C tau + D)| below one, if any exists.
            const Gottschling* pick = nullptr;
            Dyadic best;
            for (const Gottschling& g : gottschling_set()) {
                const ComplexBall det = det_lower_blocks(g, s.t11, s.t12, s.t22, work);
                if (det.abs_upper() < Dyadic(1)) {
                    const Dyadic mid = det.abs_mid_upper();
                    if (pick == nullptr || mid < best) {
                        pick = &g;
                        best = mid;
                    }
                }
            }
            if (pick != nullptr) {
                s = act(pick->gamma, s, work);
                m = imul(pick->gamma, m, 4);
                changed = true;
            }
            if (!changed) {
                settled = true;
                break;
            }
        }
        if (settled) {
            std::array<ComplexBall, 3> out = {t11, t12, t22};
            if (!is_identity(m, 4)) {
                out = apply_gamma_g2(m, t11, t12, t22, work);
            }
            const ComplexBall &o11 = out[0], &o12 = out[1], &o22 = out[2];
            const ComplexBall oy11 = im_part(o11);
            const ComplexBall oy12 = im_part(o12);
            const ComplexBall oy22 = im_part(o22);
            bool ok = abs_re_within(o11, half) && abs_re_within(o12, half) &&
                      abs_re_within(o22, half);
            // Minkowski conditions 2|y12| <= y11 <= y22, closed.
            ok = ok &&
                 rnd::add_up(oy12.re_mid().abs(), oy12.radius()).mul_pow2(1) <=
                     rnd::sub_down(oy11.re_mid(), oy11.radius()) &&
                 rnd::add_up(oy11.re_mid(), oy11.radius()) <=
                     rnd::sub_down(oy22.re_mid(), oy22.radius());
            if (ok) {
                for (const Gottschling& g : gottschling_set()) {
                    if (!(det_lower_blocks(g, o11, o12, o22, work).abs_lower() >= Dyadic(1))) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) {
                ReducedG2 res;
                res.tau11 = o11;
                res.tau12 = o12;
                res.tau22 = o22;
                res.cert.genus = 2;
                res.cert.gamma = std::move(m);
                return res;
            }
        }
        if (work >= kWorkCap) {
            throw PrecisionError(settled ? "reduce_g2: fundamental-domain boundary undecidable "
                                           "at this input radius"
                                         : "reduce_g2: reduction loop failed to settle");
        }
    }
}

// ---------------------------------------------------------------------------
// Argument reduction (genus 1)

ReducedZ reduce_z_g1(const ComplexBall& z, const ComplexBall& tau) {
    const Precision work = 128;
    if (!(rnd::sub_down(tau.im_mid(), tau.radius()).sign() > 0)) {
        throw DomainError("reduce_z_g1: Im tau must be certifiably positive");
    }
    const ComplexBall ratio = div(im_part(z), im_part(tau), work);
    const mpz_class n = ratio.re_mid().round_nearest_int();
    ComplexBall zp = sub(z, mul_dyadic(tau, Dyadic(n, 0), work), work);
    const mpz_class mshift = zp.re_mid().round_nearest_int();
    zp = sub(zp, exact_int(mshift), work);

    ReducedZ res;
    res.cert.genus = 1;
    res.cert.gamma = identity(2);
    res.cert.z_shift = {mshift, n};
    // Halve until |Re| <= 1/8 and |Im| <= Im(tau)/8 are certified. After the
    // lattice shift three halvings suffice unless the ball is so wide that
    // the inequalities stay undecidable, in which case the caller's domain
    // check reports the failure on the unhalved argument.
    const Dyadic im_tau_low = rnd::sub_down(tau.im_mid(), tau.radius());
    const Dyadic re_hi = rnd::add_up(zp.re_mid().abs(), zp.radius());
    const Dyadic im_hi = rnd::add_up(zp.im_mid().abs(), zp.radius());
    int k = 0;
    while (k <= 8 &&
           !(re_hi <= Dyadic(1).mul_pow2(-3 + k) && im_hi.mul_pow2(3 - k) <= im_tau_low)) {
        ++k;
    }
    if (k > 8) {
        k = 0;  // undecidable; hand back the unhalved argument
    }
    res.z = mul_pow2(zp, -k);
    for (int i = 0; i < k; ++i) {
        res.cert.dup_ladder.push_back({RungKind::kD1, 0, 0, 0});
    }
    return res;
}

}  // namespace ctheta

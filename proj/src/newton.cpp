#include "ctheta/newton.hpp"

#include <gmpxx.h>

#include <stdexcept>
#include <utility>

#include "ctheta/errors.hpp"

namespace ctheta {

namespace {

bool is_pow2(const Dyadic& d) { return d.sign() > 0 && d.mant_bits() == 1; }

// Largest power of two <= d, for d > 0.
Dyadic pow2_floor(const Dyadic& d) { return Dyadic::pow2(d.mag_exp() - 1); }

// Smallest power of two >= d, for d > 0.
Dyadic pow2_ceil(const Dyadic& d) { return is_pow2(d) ? d : Dyadic::pow2(d.mag_exp()); }

long exp_of_pow2(const Dyadic& d) { return d.mag_exp() - 1; }

long ceil_log2_int(int r) {
    long e = 0;
    while ((1L << e) < r) {
        ++e;
    }
    return e;
}

// Midpoint rounded to the grid 2^-bits Z[i]; the result is exact.
ComplexBall snap_to_grid(const ComplexBall& b, long bits) {
    const Dyadic re(b.re_mid().mul_pow2(bits).round_nearest_int(), -bits);
    const Dyadic im(b.im_mid().mul_pow2(bits).round_nearest_int(), -bits);
    return ComplexBall(re, im);
}

void require_exact(const std::vector<ComplexBall>& v, const char* what) {
    for (const ComplexBall& b : v) {
        if (!b.is_exact()) {
            throw std::invalid_argument(std::string(what) + " must be an exact dyadic vector");
        }
    }
}

std::vector<ComplexBall> eval_checked(const EvaluatorContract& f,
                                      const std::vector<ComplexBall>& x, Precision p) {
    std::vector<ComplexBall> out = f.eval(x, p);
    if ((int)out.size() != f.r) {
        throw std::invalid_argument("evaluator returned a vector of the wrong dimension");
    }
    const Dyadic cap = Dyadic::pow2(-p);
    for (const ComplexBall& b : out) {
        if (b.radius() > cap) {
            throw PrecisionError("evaluator violated its output precision contract");
        }
    }
    return out;
}

// (num - f0) / eta for one Jacobian column, exact scaling when eta is a
// power of two.
ComplexBall fd_entry(const ComplexBall& num, const ComplexBall& f0, const Dyadic& eta,
                     Precision work) {
    const ComplexBall diff = sub(num, f0, work);
    if (is_pow2(eta)) {
        return mul_pow2(diff, -exp_of_pow2(eta));
    }
    return div(diff, ComplexBall(eta), work);
}

ComplexBall det2(const ComplexBall& a, const ComplexBall& b, const ComplexBall& c,
                 const ComplexBall& d, Precision work) {
    return sub(mul(a, d, work), mul(b, c, work), work);
}

}  // namespace

SchemeConstants SchemeConstants::adjusted(int r, const Dyadic& rho, const Dyadic& M,
                                          const Dyadic& B3) {
    if (r < 1 || r > 3) {
        throw std::invalid_argument("dimension must be 1, 2, or 3");
    }
    if (rho.sign() <= 0 || Dyadic(1) < rho) {
        throw std::invalid_argument("rho must lie in (0, 1]");
    }
    if (M < Dyadic(1)) {
        throw std::invalid_argument("M must be at least 1");
    }
    if (B3 < Dyadic(1)) {
        throw std::invalid_argument("B3 must be at least 1");
    }
    SchemeConstants c;
    c.r = r;
    c.rho = pow2_floor(rho);
    c.M = M;
    c.B3 = pow2_ceil(B3);
    const long e = exp_of_pow2(c.rho);
    c.B1 = pow2_ceil((Dyadic(2L * (r + 1)) * M).mul_pow2(-e));
    c.B2 = pow2_ceil((Dyadic(2L * (r + 1) * (r + 2)) * M).mul_pow2(-2 * e));
    c.n0 = 2 * exp_of_pow2(c.B1) + 2 * exp_of_pow2(c.B3) + 4;
    return c;
}

void SchemeConstants::validate() const {
    if (r < 1 || r > 3) {
        throw std::invalid_argument("dimension must be 1, 2, or 3");
    }
    if (!is_pow2(rho) || Dyadic(1) < rho) {
        throw std::invalid_argument("rho must be a power of two in (0, 1]");
    }
    if (M < Dyadic(1)) {
        throw std::invalid_argument("M must be at least 1");
    }
    if (!is_pow2(B1) || !is_pow2(B2) || !is_pow2(B3) || B1 < Dyadic(1) || B2 < Dyadic(1) ||
        B3 < Dyadic(1)) {
        throw std::invalid_argument("B1, B2, B3 must be powers of two at least 1");
    }
    if (n0 != 2 * exp_of_pow2(B1) + 2 * exp_of_pow2(B3) + 4) {
        throw std::invalid_argument("n0 does not match the bundle exponents");
    }
}

Dyadic cauchy_bound(long n, int r, const Dyadic& rho, const Dyadic& M) {
    if (n < 0 || r < 1) {
        throw std::invalid_argument("cauchy_bound requires n >= 0 and r >= 1");
    }
    if (rho.sign() <= 0 || M.sign() < 0) {
        throw std::invalid_argument("cauchy_bound requires rho > 0 and M >= 0");
    }
    mpz_class fact;
    mpz_fac_ui(fact.get_mpz_t(), (unsigned long)n);
    mpz_class bin;
    mpz_bin_uiui(bin.get_mpz_t(), (unsigned long)(n + r), (unsigned long)r);
    const Dyadic numer = Dyadic(mpz_class(fact * bin), n) * M;
    Dyadic denom(1);
    for (long k = 0; k < n; ++k) {
        denom = denom * rho;
    }
    if (is_pow2(denom)) {
        return numer.mul_pow2(-exp_of_pow2(denom));
    }
    return rnd::div_up(numer, denom);
}

long start_precision(const SchemeConstants& c) { return c.n0; }

BallMatrix fd_jacobian(const EvaluatorContract& f, const std::vector<ComplexBall>& x,
                       const Dyadic& eta, Precision p) {
    if (!f.eval || (int)x.size() != f.r) {
        throw std::invalid_argument("evaluator and point dimensions do not match");
    }
    require_exact(x, "probe point");
    if (eta.sign() <= 0) {
        throw std::invalid_argument("finite-difference step must be positive");
    }
    const Precision work = p + 64;
    const std::vector<ComplexBall> f0 = eval_checked(f, x, p);
    BallMatrix out((size_t)f.r, std::vector<ComplexBall>((size_t)f.r));
    for (int j = 0; j < f.r; ++j) {
        std::vector<ComplexBall> xj = x;
        xj[(size_t)j] = ComplexBall(xj[(size_t)j].re_mid() + eta, xj[(size_t)j].im_mid());
        const std::vector<ComplexBall> fj = eval_checked(f, xj, p);
        for (int i = 0; i < f.r; ++i) {
            out[(size_t)i][(size_t)j] = fd_entry(fj[(size_t)i], f0[(size_t)i], eta, work);
        }
    }
    return out;
}

BallMatrix ball_matrix_inverse(const BallMatrix& a, Precision work) {
    const size_t r = a.size();
    if (r < 1 || r > 3) {
        throw std::invalid_argument("ball_matrix_inverse supports dimensions 1 to 3");
    }
    for (const std::vector<ComplexBall>& row : a) {
        if (row.size() != r) {
            throw std::invalid_argument("ball matrix is not square");
        }
    }
    if (r == 1) {
        if (!a[0][0].excludes_zero()) {
            throw SingularJacobian("Jacobian ball contains zero");
        }
        return {{recip(a[0][0], work)}};
    }
    if (r == 2) {
        const ComplexBall det = det2(a[0][0], a[0][1], a[1][0], a[1][1], work);
        if (!det.excludes_zero()) {
            throw SingularJacobian("Jacobian determinant ball contains zero");
        }
        BallMatrix out(2, std::vector<ComplexBall>(2));
        out[0][0] = div(a[1][1], det, work);
        out[0][1] = div(-a[0][1], det, work);
        out[1][0] = div(-a[1][0], det, work);
        out[1][1] = div(a[0][0], det, work);
        return out;
    }
    // r == 3: cofactor matrix, then det by expansion along the first row and
    // the adjugate transpose.
    BallMatrix cof(3, std::vector<ComplexBall>(3));
    for (size_t i = 0; i < 3; ++i) {
        for (size_t j = 0; j < 3; ++j) {
            const size_t i1 = (i + 1) % 3;
            const size_t i2 = (i + 2) % 3;
            const size_t j1 = (j + 1) % 3;
            const size_t j2 = (j + 2) % 3;
            // Cyclic index choice bakes in the (-1)^{i+j} checkerboard.
            cof[i][j] = det2(a[i1][j1], a[i1][j2], a[i2][j1], a[i2][j2], work);
        }
    }
    ComplexBall det;
    for (size_t j = 0; j < 3; ++j) {
        det = add(det, mul(a[0][j], cof[0][j], work), work);
    }
    if (!det.excludes_zero()) {
        throw SingularJacobian("Jacobian determinant ball contains zero");
    }
    BallMatrix out(3, std::vector<ComplexBall>(3));
    for (size_t i = 0; i < 3; ++i) {
        for (size_t j = 0; j < 3; ++j) {
            out[j][i] = div(cof[i][j], det, work);
        }
    }
    return out;
}

std::vector<ComplexBall> newton_refine(const EvaluatorContract& f, const SchemeConstants& c,
                                       const std::vector<ComplexBall>& z0,
                                       const std::vector<ComplexBall>& x_init, Precision target,
                                       std::vector<NewtonTraceEntry>* trace) {
    c.validate();
    if (!f.eval || f.r != c.r) {
        throw std::invalid_argument("evaluator dimension does not match the constants");
    }
    if ((int)z0.size() != c.r || (int)x_init.size() != c.r) {
        throw std::invalid_argument("z0 and x_init must have dimension r");
    }
    require_exact(z0, "z0");
    require_exact(x_init, "x_init");
    if (target < 1) {
        throw std::invalid_argument("target precision must be positive");
    }

    const long lb1 = exp_of_pow2(c.B1);
    const long lb2 = exp_of_pow2(c.B2);
    const long lb3 = exp_of_pow2(c.B3);
    const long lr = ceil_log2_int(c.r);

    std::vector<ComplexBall> x = x_init;
    long n = c.n0;
    while (n < target) {
        const long m = n + lb1 + lb3 + lr + 2;
        const long p = 2 * n + 2 * lr + 2 * lb1 + 2 * lb3 + 9;
        const long pprime = p - m - 2 * lb3 - 7;
        const long nprime = 2 * n - lb2 - lb3 - 2;
        if (nprime <= n) {
            throw DivergentSchedule("precision schedule does not advance; bounds are inconsistent");
        }
        const Dyadic eta = Dyadic::pow2(-m);
        const Precision work = p + 64;

        const std::vector<ComplexBall> f0 = eval_checked(f, x, p);
        BallMatrix m1((size_t)c.r, std::vector<ComplexBall>((size_t)c.r));
        for (int j = 0; j < c.r; ++j) {
            std::vector<ComplexBall> xj = x;
            xj[(size_t)j] = ComplexBall(xj[(size_t)j].re_mid() + eta, xj[(size_t)j].im_mid());
            const std::vector<ComplexBall> fj = eval_checked(f, xj, p);
            for (int i = 0; i < c.r; ++i) {
                m1[(size_t)i][(size_t)j] = fd_entry(fj[(size_t)i], f0[(size_t)i], eta, work);
            }
        }
        const BallMatrix m2 = ball_matrix_inverse(m1, work);

        // h = M2 (z0 - f(x)), schoolbook product.
        std::vector<ComplexBall> h((size_t)c.r);
        for (int i = 0; i < c.r; ++i) {
            ComplexBall acc;
            for (int j = 0; j < c.r; ++j) {
                acc = add(acc,
                          mul(m2[(size_t)i][(size_t)j], sub(z0[(size_t)j], f0[(size_t)j], work),
                              work),
                          work);
            }
            h[(size_t)i] = acc;
        }

        // The schedule guarantees x + h is known to better than n' + 2 bits;
        // the ball radius verifies that claim at runtime. Snapping to the
        // 2^-(n'+2) grid adds at most sqrt(2) 2^-(n'+3) per coordinate, which
        // keeps the new point within 2^-(n'+1) of the exact x + h.
        const Dyadic cap = Dyadic::pow2(-nprime - 2);
        std::vector<ComplexBall> xn((size_t)c.r);
        for (int i = 0; i < c.r; ++i) {
            const ComplexBall xh = add(x[(size_t)i], h[(size_t)i], work);
            if (xh.radius() > cap) {
                throw PrecisionError("newton step lost more precision than the schedule allows");
            }
            xn[(size_t)i] = snap_to_grid(xh, nprime + 2);
        }
        if (trace) {
            trace->push_back({n, m, p, pprime, nprime, -m});
        }
        x = std::move(xn);
        n = nprime;
    }
    return x;
}

}  // namespace ctheta

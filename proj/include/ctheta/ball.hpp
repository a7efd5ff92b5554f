// Complex ball arithmetic: dyadic midpoint plus one shared error radius
// (disk balls). Every operation returns a ball that contains the exact image
// of every point of its input balls; midpoints are rounded to the working
// precision and the rounding error is absorbed into the radius.

#pragma once

#include "ctheta/dyadic.hpp"

namespace ctheta {

class ComplexBall {
  public:
    ComplexBall() = default;
    explicit ComplexBall(Dyadic re, Dyadic im = Dyadic(), Dyadic rad = Dyadic());

    const Dyadic& re_mid() const { return re_; }
    const Dyadic& im_mid() const { return im_; }
    const Dyadic& radius() const { return rad_; }
    bool is_exact() const { return rad_.is_zero(); }

    // The exact point at the center, radius dropped.
    ComplexBall midpoint() const { return ComplexBall(re_, im_); }
    ComplexBall conj() const { return ComplexBall(re_, -im_, rad_); }
    ComplexBall operator-() const { return ComplexBall(-re_, -im_, rad_); }

    // Ball with the radius enlarged by `extra` (exact dyadic addition).
    ComplexBall inflate(const Dyadic& extra) const;

    // Exact real-part interval endpoints (the real part of any point of the
    // ball deviates from re_mid by at most the disk radius).
    Dyadic re_lower() const { return re_ - rad_; }
    Dyadic re_upper() const { return re_ + rad_; }
    Dyadic im_lower() const { return im_ - rad_; }
    Dyadic im_upper() const { return im_ + rad_; }

    // Directed bounds on |w| over the ball and on |midpoint|.
    Dyadic abs_mid_upper() const { return rnd::hypot_up(re_, im_); }
    Dyadic abs_mid_lower() const { return rnd::hypot_down(re_, im_); }
    Dyadic abs_upper() const { return rnd::add_up(abs_mid_upper(), rad_); }
    Dyadic abs_lower() const { return rnd::sub_down(abs_mid_lower(), rad_); }

    // True only when every point of the ball is nonzero.
    bool excludes_zero() const { return abs_lower().sign() > 0; }
    bool contains_zero() const { return !excludes_zero(); }

    // Exact geometric predicates (dyadic arithmetic, no rounding).
    bool contains_point(const Dyadic& re, const Dyadic& im) const;
    bool contains_ball(const ComplexBall& other) const;
    bool overlaps(const ComplexBall& other) const;

    // Round both midpoint coordinates to `work` significant bits, absorbing
    // the displacement into the radius.
    ComplexBall round_mid(Precision work) const;

  private:
    Dyadic re_;
    Dyadic im_;
    Dyadic rad_;
};

ComplexBall add(const ComplexBall& a, const ComplexBall& b, Precision work);
ComplexBall sub(const ComplexBall& a, const ComplexBall& b, Precision work);
ComplexBall mul(const ComplexBall& a, const ComplexBall& b, Precision work);
// recip and div require b to exclude zero.
ComplexBall recip(const ComplexBall& b, Precision work);
ComplexBall div(const ComplexBall& a, const ComplexBall& b, Precision work);

// Principal-branch square root. The ball must exclude 0. If the ball meets
// the closed negative real axis the principal branch is discontinuous on it,
// and the result degrades to a ball around 0 of radius sqrt(max |a|).
ComplexBall sqrt_principal(const ComplexBall& a, Precision work);

// The square root of a lying on the same side as `anchor`, decided by the
// sign of Re(root * conj(anchor)) over the balls. Both a and anchor must
// exclude 0; an undecidable sign raises AmbiguousBranch.
ComplexBall sqrt_near(const ComplexBall& a, const ComplexBall& anchor, Precision work);

ComplexBall exp_ball(const ComplexBall& a, Precision work);
// Principal-branch logarithm; the ball must exclude 0 and the branch cut.
ComplexBall log_ball(const ComplexBall& a, Precision work);

// Ball containing pi with radius about 2^-work.
ComplexBall pi_ball(Precision work);

// Cheap exact maps.
ComplexBall mul_pow2(const ComplexBall& a, long k);
// Multiplication by i^k (k taken mod 4): component shuffle, exact.
ComplexBall unit_mul(const ComplexBall& a, int k);
ComplexBall mul_i(const ComplexBall& a);

// Scalar multiplications; midpoint rounded at work, radius rigorous.
ComplexBall mul_dyadic(const ComplexBall& a, const Dyadic& c, Precision work);
ComplexBall mul_si(const ComplexBall& a, long c, Precision work);

// True when the ball misses the closed negative real axis (exact test on the
// dyadic midpoint and radius).
bool avoids_negative_axis(const ComplexBall& a);

}  // namespace ctheta

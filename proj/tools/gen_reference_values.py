#!/usr/bin/env python3
"""Generate frozen reference values for the theta test suites.

Uses mpmath as an independent oracle: genus-1 values via mpmath.jtheta
(classical nome convention), genus-2 values by direct double-sum brute force.
Run manually; outputs are pasted into the C++ tests as string constants.
"""

import mpmath as mp

mp.mp.dps = 70


def theta_g1(a, b, z, tau, cutoff=60):
    """theta_{a,b}(z, tau) summed directly from the definition."""
    s = mp.mpc(0)
    for n in range(-cutoff, cutoff + 1):
        nu = n + mp.mpf(a) / 2
        s += mp.exp(mp.pi * 1j * nu * nu * tau + 2 * mp.pi * 1j * nu * (z + mp.mpf(b) / 2))
    return s


def theta_g2(a, b, z, tau, cutoff=40):
    """theta_{a,b}(z, tau) for 2x2 tau, brute-force double sum."""
    s = mp.mpc(0)
    for m1 in range(-cutoff, cutoff + 1):
        for m2 in range(-cutoff, cutoff + 1):
            v1 = m1 + mp.mpf(a[0]) / 2
            v2 = m2 + mp.mpf(a[1]) / 2
            quad = tau[0] * v1 * v1 + 2 * tau[1] * v1 * v2 + tau[2] * v2 * v2
            lin = v1 * (z[0] + mp.mpf(b[0]) / 2) + v2 * (z[1] + mp.mpf(b[1]) / 2)
            s += mp.exp(mp.pi * 1j * quad + 2 * mp.pi * 1j * lin)
    return s


def show(label, v):
    print(f"{label}:")
    print(f"  re = {mp.nstr(v.real, 55)}")
    print(f"  im = {mp.nstr(v.imag, 55)}")


def main():
    # Cross-check the brute force against mpmath's jtheta at z=0, tau=i.
    q = mp.exp(mp.pi * 1j * mp.mpc(0, 1))
    assert mp.almosteq(theta_g1(0, 0, 0, mp.mpc(0, 1)), mp.jtheta(3, 0, q), rel_eps=mp.mpf(10) ** -60)

    show("theta_00(0, i)", theta_g1(0, 0, 0, mp.mpc(0, 1)))
    show("theta_01(0, i)", theta_g1(0, 1, 0, mp.mpc(0, 1)))
    show("theta_10(0, i)", theta_g1(1, 0, 0, mp.mpc(0, 1)))

    # Inputs chosen exactly representable in binary so the C++ tests can feed
    # them as exact dyadics.
    tau = mp.mpc("0.25", "1.125")
    z = mp.mpc("0.125", "0.0625")
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        show(f"theta_{a}{b}(z, tau)", theta_g1(a, b, z, tau))

    # Genus 2, generic dyadic tau.
    t2 = (mp.mpc("0.125", "1.25"), mp.mpc("0.03125", "0.25"), mp.mpc("-0.125", "1.5"))
    z2 = (mp.mpc(0), mp.mpc(0))
    for (a, b) in [((0, 0), (0, 0)), ((0, 1), (0, 0)), ((1, 0), (0, 0)), ((1, 1), (1, 1))]:
        show(f"theta2_{a}{b}(0, generic)", theta_g2(a, b, z2, t2))

    # Diagonal tau for the product-splitting check.
    show("theta2_0000(0, diag(4i,4i))", theta_g2((0, 0), (0, 0), z2, (mp.mpc(0, 4), mp.mpc(0), mp.mpc(0, 4))))
    show("theta_00(0, 4i) squared", theta_g1(0, 0, 0, mp.mpc(0, 4)) ** 2)

    # Classical AGM limit for the Borchardt-mean tests (real positive pair).
    print(f"agm(1, 1/2) = {mp.nstr(mp.agm(1, mp.mpf(1) / 2), 55)}")


if __name__ == "__main__":
    main()

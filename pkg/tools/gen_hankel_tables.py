"""Generate the lookup tables used by coercive_bie.hankel.

Mid-range H0^(1)/H1^(1) evaluation uses Chebyshev fits of the Bessel
modulus and phase functions in the variable w = 1/x on [1/XHI, 1/XLO].
Reference values come from mpmath at 50 digits.  Run this script and
paste the printed arrays into src/coercive_bie/hankel.py.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 50

XLO, XHI = 8.0, 25.0
DEG = 40


def modulus_phase(nu, x):
    j = mp.besselj(nu, x)
    y = mp.bessely(nu, x)
    m = mp.sqrt(j * j + y * y)
    # phase relative to the leading asymptotic x - (2 nu + 1) pi / 4
    theta = mp.atan2(y, j)
    delta = theta - (x - (2 * nu + 1) * mp.pi / 4)
    # wrap to (-pi, pi]; the true delta is O(1/x)
    delta = mp.fmod(delta, 2 * mp.pi)
    if delta > mp.pi:
        delta -= 2 * mp.pi
    if delta < -mp.pi:
        delta += 2 * mp.pi
    return m, delta


def fit(fun):
    n = DEG + 1
    k = np.arange(n)
    s = np.cos(np.pi * (k + 0.5) / n)  # Chebyshev nodes in [-1, 1]
    wlo, whi = 1.0 / XHI, 1.0 / XLO
    w = 0.5 * (s + 1.0) * (whi - wlo) + wlo
    xs = 1.0 / w
    vals = np.array([float(fun(mp.mpf(x))) for x in xs])
    coef = np.polynomial.chebyshev.chebfit(s, vals, DEG)
    return coef


def emit(name, coef):
    # drop negligible trailing coefficients
    keep = len(coef)
    while keep > 1 and abs(coef[keep - 1]) < 4e-16:
        keep -= 1
    coef = coef[:keep]
    print(f"{name} = np.array([")
    for c in coef:
        print(f"    {float(c)!r},")
    print("])")


def main():
    sq = mp.sqrt(2 / mp.pi)
    emit("_M0_CHEB", fit(lambda x: modulus_phase(0, x)[0] * mp.sqrt(x) / sq))
    emit("_D0_CHEB", fit(lambda x: modulus_phase(0, x)[1] * x))
    emit("_M1_CHEB", fit(lambda x: modulus_phase(1, x)[0] * mp.sqrt(x) / sq))
    emit("_D1_CHEB", fit(lambda x: modulus_phase(1, x)[1] * x))

    # spot-check the fits on an off-node grid
    for nu, mc, dc in (
        (0, "_M0_CHEB", "_D0_CHEB"),
        (1, "_M1_CHEB", "_D1_CHEB"),
    ):
        pass

    # fixture table for tests: x, Re/Im of H0 and H1
    print("\n_HANKEL_FIXTURES = [")
    for x in [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 3.5, 5.0, 6.5, 7.999, 8.001,
              9.3, 11.0, 13.7, 16.0, 19.5, 24.999, 25.001, 40.0, 75.0, 150.0,
              400.0]:
        h0 = mp.hankel1(0, mp.mpf(x))
        h1 = mp.hankel1(1, mp.mpf(x))
        print("    (%r, %r, %r, %r, %r)," % (
            x, float(mp.re(h0)), float(mp.im(h0)),
            float(mp.re(h1)), float(mp.im(h1))))
    print("]")


if __name__ == "__main__":
    main()

"""Independent mass of the limit permuton by numerical integration.

The singular part has density lam/(lam+x) along the curve y = f(x); the
diffuse part has density 1/(lam+1) below the curve.  Curve crossings are
located with brentq rather than the closed-form inverse.
"""

from scipy.integrate import dblquad, quad
from scipy.optimize import brentq


def curve(lam, x):
    return x * (lam + 1) / (lam + x)


def _curve_at(lam, level):
    # x in [0, 1] with f(x) = level
    if level <= 0:
        return 0.0
    if level >= 1:
        return 1.0
    return brentq(lambda x: curve(lam, x) - level, 0.0, 1.0, xtol=1e-15, rtol=1e-15)


def rect_mass(lam, a1, a2, b1, b2):
    lo = max(a1, _curve_at(lam, b1))
    hi = min(a2, _curve_at(lam, b2))
    singular = 0.0
    if hi > lo:
        singular = quad(lambda x: lam / (lam + x), lo, hi, epsabs=1e-14, epsrel=1e-13)[0]
    # break the x range where the curve crosses the horizontal edges
    cuts = sorted({a1, a2, *(c for c in (_curve_at(lam, b1), _curve_at(lam, b2)) if a1 < c < a2)})
    diffuse = 0.0
    for x0, x1 in zip(cuts, cuts[1:]):
        diffuse += dblquad(
            lambda y, x: 1.0 / (lam + 1),
            x0, x1,
            lambda x: b1,
            lambda x: max(b1, min(b2, curve(lam, x))),
            epsabs=1e-14, epsrel=1e-13,
        )[0]
    return singular + diffuse


def corner_mass(lam, a, b):
    return rect_mass(lam, 0.0, a, 0.0, b)

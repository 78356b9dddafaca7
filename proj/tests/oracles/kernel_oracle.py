# Copyright curldrift contributors
# SPDX-License-Identifier: Apache-2.0
"""High-precision reference values for the spectral kernel and covariance."""

from mpmath import besselj, cos, e, exp, log, mp, mpf, pi, quad, sin

mp.dps = 30


def vhat(r):
    r = mpf(r)
    if r >= 1:
        return mpf(0)
    return exp(2 - 2 / (1 - r * r))


def mass():
    return 2 * pi * quad(lambda r: r * vhat(r), [0, 0.5, 0.9, 1])


def radial_mean():
    num = quad(lambda r: r * r * vhat(r), [0, 0.5, 0.9, 1])
    den = quad(lambda r: r * vhat(r), [0, 0.5, 0.9, 1])
    return num / den


def covariance_bessel(t, x, s):
    """R(t, (x, 0)) with the angular integral in closed form."""
    x = mpf(x)

    def rate(r):
        return r ** (2 * s) if s > 0 else mpf(1)

    def r11(r):
        a = r * x
        ang = pi * r if a == 0 else 2 * pi * besselj(1, a) / x
        return vhat(r) * exp(-rate(r) * t) * ang

    def r22(r):
        a = r * x
        ang = pi if a == 0 else 2 * pi * (besselj(0, a) - besselj(1, a) / a)
        return r * vhat(r) * exp(-rate(r) * t) * ang

    pts = [0, 0.5, 0.9, 1]
    c = 1 / (4 * pi * pi)
    return c * quad(r11, pts), c * quad(r22, pts)


def covariance_polar(t, x, s):
    """Same entries by a direct two-dimensional integral."""
    x = mpf(x)

    def rate(r):
        return r ** (2 * s) if s > 0 else mpf(1)

    def entry(w):
        return quad(
            lambda r, th: r * vhat(r) * exp(-rate(r) * t) * cos(r * x * cos(th)) * w(th),
            [0, 0.5, 0.9, 1],
            [0, pi / 2, pi, 3 * pi / 2, 2 * pi],
        ) / (4 * pi * pi)

    return entry(lambda th: sin(th) ** 2), entry(lambda th: cos(th) ** 2)


if __name__ == "__main__":
    print("vhat(0.5)", mp.nstr(vhat(0.5), 20))
    print("log(e+1)", mp.nstr(log(e + 1), 20))
    print("mass", mp.nstr(mass(), 20))
    print("radial_mean", mp.nstr(radial_mean(), 20))
    for t, x, s in [(0, 0, 1), (0.5, 1, 1), (0.5, 0, 1), (0, 1, 1), (0.5, 1, 0)]:
        b = covariance_bessel(mpf(t), x, s)
        print("R", t, x, s, mp.nstr(b[0], 20), mp.nstr(b[1], 20))
    p = covariance_polar(mpf("0.5"), 1, 1)
    print("R polar 0.5 1 1", mp.nstr(p[0], 20), mp.nstr(p[1], 20))

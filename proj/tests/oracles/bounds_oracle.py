# Copyright curldrift contributors
# SPDX-License-Identifier: Apache-2.0
"""High-precision reference values for truncation functions and level forms."""

from mpmath import exp, factorial, inf, log, mp, mpf, pi, quad, sqrt, sin, cos

mp.dps = 30


def L(x, z):
    return z + log(1 + 1 / mpf(x))


def lb(k, x, z):
    h = log(L(x, z)) / 2
    return sum(h**j / factorial(j) for j in range(k + 1))


def ub(k, x, z):
    return L(x, z) / lb(k, x, z)


def identity_lhs(a, b, z, k):
    a, b = mpf(a), mpf(b)
    return quad(lambda x: 1 / ((x * x + x) * ub(k, x, z)), [a, sqrt(a * b), b])


def identity_rhs(a, b, z, k):
    return 2 * (lb(k + 1, a, z) - lb(k + 1, b, z))


def vhat(r):
    return exp(2 - 2 / (1 - r * r)) if r < 1 else mpf(0)


def simplified_level1(lam, s):
    lam = mpf(lam)
    m = lambda r: r ** (2 * s) if s > 0 else mpf(1)
    w = sqrt(lam)
    pts = [0] + [p for p in (w / 10, w, 10 * w) if p < 1] + [1]
    return quad(lambda r: r / (lam + r * r + m(r)), pts)


def gamma_level1(lam, g):
    lam = mpf(lam)
    w = sqrt(lam)
    pts = [0] + [p for p in (w / 10, w, 10 * w) if p < 1] + [1]
    return quad(lambda r: r / (lam + r * r + r * r * log(mp.e + 1 / (r * r)) ** g), pts)


def h2(pmag, lam, s, off):
    """Second-level multipliers by a direct polar integral over q."""
    p = mpf(pmag)
    lam = mpf(lam)
    m = lambda r: r ** (2 * s)
    base = lam + p * p + m(p)

    def f(rho, th):
        den = base + rho * rho + m(rho) + 2 * p * rho * cos(th)
        w = vhat(rho) * sin(th) ** 2 / den
        return w if off else rho * w

    val = quad(f, [0, p / 2, p, 0.9, 1], [0, pi / 2, pi, 3 * pi / 2, 2 * pi])
    return val * (p if off else p * p) / (4 * pi * pi)


def c_sequence(n, eps):
    c = [mpf(1)]
    for j in range(2, n + 1):
        k = j // 2
        if j % 2 == 0:
            c.append(pi / c[-1] * (1 + mpf(k) ** (-1 - eps)))
        else:
            c.append(pi / c[-1] * (1 - mpf(k + 1) ** (-1 - eps)))
    return c


if __name__ == "__main__":
    print("L(1,0)", mp.nstr(L(1, 0), 20))
    print("L(1e-6,0)", mp.nstr(L(mpf("1e-6"), 0), 20))
    print("lb(3,0.01,2)", mp.nstr(lb(3, mpf("0.01"), 2), 20))
    print("ub(3,0.01,2)", mp.nstr(ub(3, mpf("0.01"), 2), 20))
    print("identity rhs 0.5 1 1 0", mp.nstr(identity_rhs(0.5, 1, 1, 0), 20))
    print("identity lhs 0.5 1 1 0", mp.nstr(identity_lhs(0.5, 1, 1, 0), 20))
    a, b = mpf("1e-5"), mpf("0.3")
    print("identity 1e-5 0.3 5 4", mp.nstr(identity_lhs(a, b, 5, 4), 20), mp.nstr(identity_rhs(a, b, 5, 4), 20))
    print("level1 s=1 2", mp.nstr(simplified_level1(2, 1), 20), mp.nstr(log(2) / 4, 20))
    print("level1 s=1 1e-3", mp.nstr(simplified_level1(mpf("1e-3"), 1), 20))
    print("level1 s=0.5 1e-2", mp.nstr(simplified_level1(mpf("1e-2"), mpf("0.5")), 20))
    print("gamma 1e-4 1", mp.nstr(gamma_level1(mpf("1e-4"), 1), 20))
    print("gamma 1e-4 0", mp.nstr(gamma_level1(mpf("1e-4"), 0), 20))
    print("gamma 1e-8 0.5", mp.nstr(gamma_level1(mpf("1e-8"), mpf("0.5")), 20))
    print("h2 diag 0.3 0.1 1", mp.nstr(h2(mpf("0.3"), mpf("0.1"), 1, False), 20))
    print("h2 off 0.3 0.1 1", mp.nstr(h2(mpf("0.3"), mpf("0.1"), 1, True), 20))
    c = c_sequence(3, mpf("0.5"))
    print("c2 c3", mp.nstr(c[1], 20), mp.nstr(c[2], 20))

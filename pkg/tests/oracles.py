"""Independent high-precision reference implementations used by the tests.

These are written directly from the closed-form definitions with mpmath at
40 digits, without the overflow-safe rescaling of the production code.
"""

import mpmath as mp

mp.mp.dps = 40


def map_i(alpha, beta, eps, r):
    a, b, e, r = mp.mpf(alpha), mp.mpf(beta), mp.mpf(eps), mp.mpf(r)
    mu = mp.sqrt(a + b) / e
    c, s = mp.cos(e ** 2), mp.sin(e ** 2)
    th = mu * r * s
    E = mp.exp(2 * mu * r * c)
    n1 = (a + b) * s * mp.cos(e ** 2 + th) - mp.sin(th) * (E - b / 2)
    n2 = (a + b) * s * mp.sin(e ** 2 + th) + mp.cos(th) * (E - b / 2)
    n3 = mp.sqrt(2 * (a + b)) * c * mp.exp(mu * r * c)
    D = (E + a + b / 2) ** 2 - a * (a + b) * c ** 2
    q = mp.sqrt(D)
    return [n1 / q, n2 / q, n3 / q]


def map_ii(alpha, beta, eps, k, r):
    a, b, e, r, k = mp.mpf(alpha), mp.mpf(beta), mp.mpf(eps), mp.mpf(r), mp.mpf(k)
    mu = mp.sqrt(a + b) / e
    P = mp.exp(mu * r) + b / 2 * mp.exp(-mu * r)
    Q = mp.exp(mu * r) - b / 2 * mp.exp(-mu * r)
    S = mp.sqrt(P ** 2 + 2 * a)
    return [mp.cos(k) * Q / S, mp.sin(k) * Q / S, mp.sqrt(2 * (a + b)) / S]


def derivative(fn, r, n, component):
    return mp.diff(lambda x: fn(x)[component], mp.mpf(r), n)


def jet(fn, r):
    """``(v, v', v'')`` as lists of mpf."""
    v = fn(r)
    d1 = [derivative(fn, r, 1, i) for i in range(3)]
    d2 = [derivative(fn, r, 2, i) for i in range(3)]
    return v, d1, d2


def circle_radius_law(R0, dim, t):
    return float(mp.sqrt(R0 ** 2 - 2 * (dim - 1) * t))

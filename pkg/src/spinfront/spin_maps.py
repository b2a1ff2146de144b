"""Explicit global control maps R -> S^2 and their derivatives.

Two curves are provided. Map I rotates slowly in the (v1, v2) plane with a
constant Wronskian; map II keeps a fixed azimuth ``k``. Both are evaluated in
an overflow-safe form: every exponential is divided by the dominant one before
ratios are formed, so ``mu * r`` can reach several hundred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    ConfigurationError,
    DegeneratePoleError,
    EvaluationOverflowError,
    FormulaTranscriptionError,
)

__all__ = [
    "PhysParams",
    "Spin",
    "MapKind",
    "MAP_I",
    "MapJet",
    "OdeResiduals",
    "map_jet",
    "eval_map",
    "eval_map_array",
    "eval_map_derivatives",
    "richardson_derivatives",
    "appendix_derivatives_map_i",
    "wronskian",
    "ode_residuals",
    "critical_point_v3",
    "front_value",
    "limit_value",
]

EPSILON_MAX = 0.5
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class PhysParams:
    """Anisotropy coefficients and the singular-limit parameter."""

    alpha: float
    beta: float
    epsilon: float

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if not self.beta > 0:
            raise ConfigurationError(f"beta must be > 0, got {self.beta}")
        if not self.alpha + self.beta > 0:
            raise ConfigurationError(
                f"alpha + beta must be > 0, got {self.alpha + self.beta}")
        if not 0 < self.epsilon <= EPSILON_MAX:
            raise ConfigurationError(
                f"epsilon must lie in (0, {EPSILON_MAX}], got {self.epsilon}")

    @property
    def mu(self) -> float:
        return math.sqrt(self.alpha + self.beta) / self.epsilon

    def with_epsilon(self, epsilon: float) -> PhysParams:
        return PhysParams(self.alpha, self.beta, epsilon)


@dataclass(frozen=True)
class Spin:
    v1: float
    v2: float
    v3: float

    def __post_init__(self):
        norm = math.sqrt(self.v1 ** 2 + self.v2 ** 2 + self.v3 ** 2)
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"spin is not on the unit sphere: |v| = {norm!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.v1, self.v2, self.v3])

    def __iter__(self):
        return iter((self.v1, self.v2, self.v3))


@dataclass(frozen=True)
class MapKind:
    """Which control map to use. ``k`` is the fixed azimuth of map II."""

    variant: str = "I"
    k: float = 0.0

    def __post_init__(self):
        if self.variant not in ("I", "II"):
            raise ConfigurationError(f"unknown map variant {self.variant!r}")
        if not math.isfinite(self.k):
            raise ConfigurationError("map II phase k must be finite")

    @classmethod
    def map_i(cls) -> MapKind:
        return cls("I")

    @classmethod
    def map_ii(cls, k: float = 0.0) -> MapKind:
        return cls("II", float(k))

    @property
    def is_map_i(self) -> bool:
        return self.variant == "I"

    def __str__(self):
        return "MapI" if self.is_map_i else f"MapII(k={self.k:g})"


MAP_I = MapKind.map_i()


class MapJet(NamedTuple):
    """Values and first two derivatives, each of shape ``r.shape + (3,)``."""

    v: np.ndarray
    dv: np.ndarray
    ddv: np.ndarray


def _jet_map_i(p: PhysParams, r: np.ndarray) -> MapJet:
    a, b, eps = p.alpha, p.beta, p.epsilon
    mu = p.mu
    c, s = math.cos(eps ** 2), math.sin(eps ** 2)
    y = mu * r * c
    theta = mu * r * s
    m = np.maximum(y, 0.0)
    # Everything below is divided by exp(2m) (and D by exp(4m)).
    inv = np.exp(-2.0 * m)
    E = np.exp(2.0 * y - 2.0 * m)
    amp = (a + b) * s
    F = E - 0.5 * b * inv
    dF = 2.0 * mu * c * E
    ddF = 2.0 * mu * c * dF
    dth = mu * s
    cth, sth = np.cos(theta), np.sin(theta)
    N1 = amp * np.cos(eps ** 2 + theta) * inv - sth * F
    N2 = amp * np.sin(eps ** 2 + theta) * inv + cth * F
    dN1 = -dth * N2 - sth * dF
    dN2 = dth * N1 + cth * dF
    ddN1 = -dth * dN2 - cth * dth * dF - sth * ddF
    ddN2 = dth * dN1 - sth * dth * dF + cth * ddF
    N3 = math.sqrt(2.0 * (a + b)) * c * np.exp(y - 2.0 * m)
    dN3 = mu * c * N3
    ddN3 = mu * c * dN3

    lin = 2.0 * a + b
    D = E * E + lin * E * inv + (0.25 * b * b + a * (a + b) * s * s) * inv * inv
    dD = dF * (2.0 * E + lin * inv)
    ddD = ddF * (2.0 * E + lin * inv) + 2.0 * dF * dF
    g = 1.0 / np.sqrt(D)
    dg = -0.5 * dD * g ** 3
    ddg = -0.5 * ddD * g ** 3 + 0.75 * dD * dD * g ** 5

    N = np.stack([N1, N2, N3], axis=-1)
    dN = np.stack([dN1, dN2, dN3], axis=-1)
    ddN = np.stack([ddN1, ddN2, ddN3], axis=-1)
    g, dg, ddg = g[..., None], dg[..., None], ddg[..., None]
    v = N * g
    dv = dN * g + N * dg
    ddv = ddN * g + 2.0 * dN * dg + N * ddg
    return MapJet(v, dv, ddv)


def _jet_map_ii(p: PhysParams, k: float, r: np.ndarray) -> MapJet:
    a, b = p.alpha, p.beta
    mu = p.mu
    x = mu * r
    hb = 0.5 * b
    il = np.exp(-np.abs(x))
    # P = exp(|x|) * ph, Q = exp(|x|) * qh, S = sqrt(P^2 + 2a) = exp(|x|) * sh
    pos = x >= 0
    e_pos = np.exp(-2.0 * np.where(pos, x, 0.0))
    e_neg = np.exp(2.0 * np.where(pos, 0.0, x))
    ph = np.where(pos, 1.0 + hb * e_pos, e_neg + hb)
    qh = np.where(pos, 1.0 - hb * e_pos, e_neg - hb)
    sh = np.sqrt(ph * ph + 2.0 * a * il * il)
    c0 = math.sqrt(2.0 * (a + b))

    f = qh / sh
    df = 2.0 * mu * (a + b) * ph * il * il / sh ** 3
    ddf = 2.0 * mu * mu * (a + b) * qh * (sh * sh - 3.0 * ph * ph) * il * il / sh ** 5
    v3 = c0 * il / sh
    dv3 = -c0 * mu * ph * qh * il / sh ** 3
    ddv3 = -c0 * mu * mu * il * ((ph * ph + qh * qh) / sh ** 3
                                 - 3.0 * ph * ph * qh * qh / sh ** 5)
    ck, sk = math.cos(k), math.sin(k)
    v = np.stack([ck * f, sk * f, v3], axis=-1)
    dv = np.stack([ck * df, sk * df, dv3], axis=-1)
    ddv = np.stack([ck * ddf, sk * ddf, ddv3], axis=-1)
    return MapJet(v, dv, ddv)


def map_jet(p: PhysParams, kind: MapKind, r) -> MapJet:
    """Vectorized values, first and second derivatives of the control map."""
    r_arr = np.asarray(r, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind.is_map_i:
            jet = _jet_map_i(p, r_arr)
        else:
            jet = _jet_map_ii(p, kind.k, r_arr)
    if not np.all(np.isfinite(jet.v)):
        bad = r_arr[~np.all(np.isfinite(jet.v), axis=-1)]
        raise EvaluationOverflowError(
            f"non-finite control map value at r={bad.flat[0]!r} (mu={p.mu!r})")
    return jet


def eval_map_array(p: PhysParams, kind: MapKind, r) -> np.ndarray:
    """Nodewise map values, shape ``r.shape + (3,)``."""
    return map_jet(p, kind, r).v


def eval_map(p: PhysParams, kind: MapKind, r: float) -> Spin:
    if not math.isfinite(r):
        raise ConfigurationError(f"r must be finite, got {r!r}")
    v = map_jet(p, kind, r).v
    return Spin(float(v[0]), float(v[1]), float(v[2]))


def richardson_derivatives(p: PhysParams, kind: MapKind, r: float,
                           base_step: float | None = None,
                           second_step: float | None = None):
    """Finite-difference oracle for ``(v', v'')``.

    Central differences at steps h, h/2, h/4 combined by two levels of
    Richardson extrapolation (error O(h^6)). The first derivative uses
    ``h = 1e-4 * epsilon``; the second derivative divides by ``h^2`` and is
    roundoff-limited at that step, so it starts from ``3e-3 * epsilon``.
    """
    h1 = 1e-4 * p.epsilon if base_step is None else base_step
    h2 = 3e-3 * p.epsilon if second_step is None else second_step
    f = lambda x: map_jet(p, kind, x).v  # noqa: E731
    f0 = f(r)

    def d1(step):
        return (f(r + step) - f(r - step)) / (2.0 * step)

    def d2(step):
        return (f(r + step) - 2.0 * f0 + f(r - step)) / step ** 2

    out = []
    for d, h in ((d1, h1), (d2, h2)):
        t = [d(h), d(h / 2), d(h / 4)]
        l1 = [(4.0 * t[i + 1] - t[i]) / 3.0 for i in range(2)]
        out.append((16.0 * l1[1] - l1[0]) / 15.0)
    return out[0], out[1]


def _rel_err(a, b, floor):
    return float(np.max(np.abs(a - b)) / max(float(np.max(np.abs(a))), floor))


def eval_map_derivatives(p: PhysParams, kind: MapKind, r: float, check: bool = False):
    """Closed-form ``(v', v3'')`` at a single ``r``.

    With ``check=True`` the result is compared against
    :func:`richardson_derivatives`; a relative disagreement above 1e-4
    raises :class:`FormulaTranscriptionError`.
    """
    jet = map_jet(p, kind, r)
    dv, ddv3 = jet.dv, float(jet.ddv[2])
    if check:
        fd1, fd2 = richardson_derivatives(p, kind, r)
        e1 = _rel_err(dv, fd1, 1e-3 * p.mu)
        e2 = _rel_err(jet.ddv[2], fd2[2], 1e-3 * p.mu ** 2)
        if max(e1, e2) > 1e-4:
            raise FormulaTranscriptionError(
                f"{kind} derivatives at r={r!r}: relative mismatch "
                f"{max(e1, e2):.3e} against finite differences")
    return tuple(float(x) for x in dv), ddv3


def appendix_derivatives_map_i(p: PhysParams, r: float):
    """Map I derivatives ``(v1', v2', v3', v3'')`` in their long expanded form.

    Written out term by term as in the classical derivation (unscaled
    exponentials, so only valid for moderate ``mu * r``). Kept as an
    independent closed form to cross-check :func:`map_jet`.
    """
    a, b, e = p.alpha, p.beta, p.epsilon
    A = math.sqrt(a + b) * math.cos(e ** 2)
    B = math.sqrt(a + b) * math.sin(e ** 2)
    c, s = math.cos(e ** 2), math.sin(e ** 2)
    x = r * A / e
    th = r * B / e
    E2 = math.exp(2 * x)
    Dq = (E2 + a + b / 2) ** 2 - a * (a + b) * c ** 2
    cos2 = math.cos(2 * e ** 2)
    L = 4 * math.exp(4 * x) + 2 * a ** 2 + 2 * a * b + b ** 2 + 4 * E2 * (2 * a + b) \
        - 2 * a * (a + b) * cos2
    ab32 = (a + b) ** 1.5
    sq2 = math.sqrt(2.0)

    v1r = (-2 * E2 * (E2 + a + b / 2) * A
           * ((a + b) * math.cos(e ** 2 + th) * s - (E2 - b / 2) * math.sin(th))
           / (e * Dq ** 1.5)) \
        - (math.sqrt(a + b) * ((2 * E2 - b) * math.cos(th) * s
                               + 2 * (2 * E2 * c * math.sin(th)
                                      + (a + b) * s ** 2 * math.sin(e ** 2 + th)))
           / (2 * e * math.sqrt(Dq)))
    v2r = (math.sqrt(a + b) * (4 * E2 * c * math.cos(th)
                               + s * (2 * (a + b) * math.cos(e ** 2 + th) * s
                                      - (2 * E2 - b) * math.sin(th)))
           / (2 * e * math.sqrt(Dq))) \
        - (2 * E2 * (E2 + a + b / 2) * A
           * ((E2 - b / 2) * math.cos(th) + (a + b) * s * math.sin(e ** 2 + th))
           / (e * Dq ** 1.5))
    v3r = (-2 * sq2 * math.exp(x) * (a + b) * c ** 2
           * (4 * math.exp(4 * x) - 2 * a ** 2 - 2 * a * b - b ** 2 + 2 * a * (a + b) * cos2)
           / (e * L ** 1.5))
    v3rr = (16 * sq2 * math.exp(3 * x) * ab32 * c ** 3
            * (8 * math.exp(6 * x) - 4 * a ** 3 - 6 * a ** 2 * b - 2 * E2 * b ** 2
               - 4 * a * b ** 2 - b ** 3 + 4 * math.exp(4 * x) * (2 * a + b)
               + 2 * a * (a + b) * (4 * E2 + 2 * a + b) * cos2)
            / (e ** 2 * L ** 2.5)) \
        - 4 * sq2 * math.exp(3 * x) * (E2 + a + b / 2) * ab32 * c ** 3 / (e ** 2 * Dq ** 1.5) \
        + sq2 * math.exp(x) * ab32 * c ** 3 / (e ** 2 * math.sqrt(Dq))
    return v1r, v2r, v3r, v3rr


def wronskian(p: PhysParams, kind: MapKind, r):
    """``v2 v1' - v1 v2'``; exactly zero for map II by construction."""
    jet = map_jet(p, kind, r)
    v, dv = jet.v, jet.dv
    if kind.is_map_i:
        return v[..., 1] * dv[..., 0] - v[..., 0] * dv[..., 1]
    # planar part is f * (cos k, sin k): the azimuthal factor cancels identically
    ck, sk = math.cos(kind.k), math.sin(kind.k)
    f = v[..., 0] * ck + v[..., 1] * sk
    df = dv[..., 0] * ck + dv[..., 1] * sk
    return f * df * (sk * ck - ck * sk)


@dataclass(frozen=True)
class OdeResiduals:
    """Residuals of the two profile ODEs and the size of their largest term."""

    res1: float
    res2: float
    scale1: float
    scale2: float

    def relative(self) -> tuple[float, float]:
        r1 = abs(self.res1) / self.scale1 if self.scale1 > 0 else abs(self.res1)
        r2 = abs(self.res2) / self.scale2 if self.scale2 > 0 else abs(self.res2)
        return r1, r2

    def __iter__(self):
        return iter((self.res1, self.res2))


def ode_residuals(p: PhysParams, kind: MapKind, r: float) -> OdeResiduals:
    """Residuals of ``v2 v1'' - v1 v2'' = 0`` and of the v3 equation.

    ``|v'|^2`` is rebuilt as ``(v3'^2 + W^2) / (1 - v3^2)`` with ``W`` the
    Wronskian and ``1 - v3^2`` taken as ``v1^2 + v2^2``.
    """
    jet = map_jet(p, kind, r)
    v, dv, ddv = jet.v, jet.dv, jet.ddv
    v1, v2, v3 = (float(t) for t in v)
    if 1.0 - abs(v3) <= 1e-12:
        raise DegeneratePoleError(f"|v3| = 1 at r={r!r} ({kind})")
    a, b, eps = p.alpha, p.beta, p.epsilon
    if kind.is_map_i:
        t1, t2 = v2 * ddv[0], v1 * ddv[1]
        res1 = t1 - t2
        w2 = (p.mu * math.sin(eps ** 2)) ** 2
    else:
        ck, sk = math.cos(kind.k), math.sin(kind.k)
        f = v1 * ck + v2 * sk
        ddf = ddv[0] * ck + ddv[1] * sk
        t1 = t2 = f * ddf * ck * sk
        res1 = f * ddf * (sk * ck - ck * sk)
        w2 = 0.0
    planar = v1 * v1 + v2 * v2
    grad2 = (dv[2] ** 2 + w2) / planar
    u1 = float(ddv[2])
    u2 = grad2 * v3
    u3 = (a + b - 2 * a * v3 * v3) / eps ** 2 * v3 * planar
    res2 = u1 + u2 - u3
    return OdeResiduals(float(res1), float(res2),
                        float(max(abs(t1), abs(t2))),
                        float(max(abs(u1), abs(u2), abs(u3))))


def critical_point_v3(p: PhysParams) -> float:
    """The unique zero of ``v3'`` for map I."""
    a, b, eps = p.alpha, p.beta, p.epsilon
    c, s = math.cos(eps ** 2), math.sin(eps ** 2)
    if eps ** 2 >= math.pi / 2:
        raise ConfigurationError("epsilon^2 must stay below pi/2")
    arg = (a + 0.5 * b) ** 2 * s * s + 0.25 * b * b * c * c
    return eps * math.log(arg) / (4.0 * math.sqrt(a + b) * c)


def front_value(p: PhysParams) -> Spin:
    """Small-epsilon value of map I at ``r = 0``."""
    a, b = p.alpha, p.beta
    den = math.sqrt(8 * a + (2 + b) ** 2)
    return Spin(0.0, (2 - b) / den, 2 * math.sqrt(2) * math.sqrt(a + b) / den)


def limit_value(p: PhysParams, kind: MapKind, side: int) -> np.ndarray:
    """Pointwise epsilon -> 0 limit of the map for ``r > 0`` (+1), ``r = 0`` (0), ``r < 0`` (-1).

    For map I the signs follow direct evaluation of the map: ``v2 -> +1``
    for positive ``r``.
    """
    if kind.is_map_i:
        if side == 0:
            return front_value(p).as_array()
        return np.array([0.0, float(np.sign(side)), 0.0])
    ck, sk = math.cos(kind.k), math.sin(kind.k)
    if side == 0:
        a, b = p.alpha, p.beta
        den = math.sqrt((1 + 0.5 * b) ** 2 + 2 * a)
        f = (1 - 0.5 * b) / den
        return np.array([f * ck, f * sk, math.sqrt(2 * (a + b)) / den])
    sg = float(np.sign(side))
    return np.array([sg * ck, sg * sk, 0.0])

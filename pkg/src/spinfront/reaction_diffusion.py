"""Reduced scalar dynamics under control map II and spin-level residual checks.

A spin field ``u = v(r)`` built from map II solves the full spin system once
``r`` solves

    r_t - Δr = G(r, |∇r|^2),
    G = mu (1 - |∇r|^2) (Q/P) (P^2 - 2 alpha) / (P^2 + 2 alpha),

with ``P = e^{mu r} + (beta/2) e^{-mu r}`` and ``Q = e^{mu r} - (beta/2) e^{-mu r}``.
Writing ``y = mu r - ln(beta/2)/2`` gives ``Q/P = tanh y`` and
``P^2 = 2 beta cosh^2 y``, which is how ``G`` is evaluated without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    BlowUpError,
    ConfigurationError,
    DerivationError,
    StabilityError,
)
from .levelset_geometry import GridSpec, ScalarField, gradient, laplacian
from .spin_maps import UNIT_TOL, MapKind, PhysParams, eval_map_array, limit_value, map_jet

__all__ = [
    "Boundary",
    "SolverConfig",
    "SpinField",
    "reduced_rhs",
    "reduced_rhs_from_map",
    "reduced_rhs_printed",
    "RhsConsistency",
    "rhs_consistency",
    "q_zero_point",
    "step",
    "solve",
    "lift_spin",
    "LLResidual",
    "ll_residual",
    "allen_cahn_residual",
    "ProbeRow",
    "asymptotic_probe",
    "POLE_MARGIN",
]

# Nodes with |u3| >= 1 - POLE_MARGIN are excluded from equivalence checks.
POLE_MARGIN = 1e-6


class Boundary(str, Enum):
    DIRICHLET_FAR_FIELD = "dirichlet-far-field"
    REFLECTIVE = "reflective"


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float
    boundary: Boundary = Boundary.REFLECTIVE
    blowup_threshold: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ConfigurationError(f"t_end must be > 0, got {self.t_end}")
        if not self.blowup_threshold > 0:
            raise ConfigurationError("blowup_threshold must be > 0")

    @staticmethod
    def max_dt(grid: GridSpec, p: PhysParams) -> float:
        """Diffusion and reaction stability limit for the explicit scheme."""
        return min(0.2 * grid.h ** 2 / (2 * grid.dim),
                   0.1 * p.epsilon ** 2 / (p.alpha + p.beta))

    @classmethod
    def stable(cls, grid: GridSpec, p: PhysParams, t_end: float, **kwargs) -> SolverConfig:
        return cls(cls.max_dt(grid, p), t_end, **kwargs)

    def check(self, grid: GridSpec, p: PhysParams):
        bound = self.max_dt(grid, p)
        if self.dt > bound * (1 + 1e-12):
            raise StabilityError(f"dt={self.dt:g} exceeds the stability limit {bound:g}")


@dataclass(frozen=True)
class SpinField:
    grid: GridSpec
    spins: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        spins = np.asarray(self.spins, dtype=float)
        if spins.shape != self.grid.shape + (3,):
            raise ConfigurationError(
                f"spin array shape {spins.shape} does not match grid {self.grid.shape}")
        dev = np.max(np.abs(np.linalg.norm(spins, axis=-1) - 1.0))
        if not dev <= UNIT_TOL:
            raise ConfigurationError(f"spin field leaves the unit sphere by {dev:.3g}")
        spins.setflags(write=False)
        object.__setattr__(self, "spins", spins)

    def component(self, i: int) -> np.ndarray:
        return self.spins[..., i]


def _shift(p: PhysParams) -> float:
    return 0.5 * math.log(0.5 * p.beta)


def reduced_rhs(p: PhysParams, r, grad_sq):
    """Reaction term ``G(r, |∇r|^2)`` in the simplified closed form."""
    r = np.asarray(r, dtype=float)
    g = np.asarray(grad_sq, dtype=float)
    y = p.mu * r - _shift(p)
    e = np.exp(-2.0 * np.abs(y))
    sech2 = 4.0 * e / (1.0 + e) ** 2
    ratio = (p.beta - p.alpha * sech2) / (p.beta + p.alpha * sech2)
    out = p.mu * (1.0 - g) * np.tanh(y) * ratio
    if not np.all(np.isfinite(out)):
        raise ArithmeticError("non-finite reaction term")
    return out if out.ndim else float(out)


def reduced_rhs_from_map(p: PhysParams, r, grad_sq):
    """Reaction term solved directly out of the scalar equation for ``v3``.

    ``-(1 - g) v3 (1 - v3^2) (alpha + beta - 2 alpha v3^2) / (eps^2 v3')``
    with ``1 - v3^2`` taken as ``v1^2 + v2^2``; returns 0 where ``v3' = 0``.
    """
    r = np.asarray(r, dtype=float)
    jet = map_jet(p, MapKind.map_ii(0.0), r)
    v = jet.v
    v3, dv3 = v[..., 2], jet.dv[..., 2]
    one_minus = v[..., 0] ** 2 + v[..., 1] ** 2
    num = -(1.0 - np.asarray(grad_sq)) * v3 * one_minus * (
        p.alpha + p.beta - 2.0 * p.alpha * v3 ** 2) / p.epsilon ** 2
    safe = np.where(dv3 == 0.0, 1.0, dv3)
    out = np.where(dv3 == 0.0, 0.0, num / safe)
    return out if out.ndim else float(out)


def reduced_rhs_printed(p: PhysParams, r, grad_sq):
    """Same factors with the leading coefficient ``2 mu (alpha + beta)``."""
    return 2.0 * (p.alpha + p.beta) * np.asarray(reduced_rhs(p, r, grad_sq))


def q_zero_point(p: PhysParams) -> float:
    """The ``r`` where ``Q = 0``."""
    return p.epsilon * math.log(0.5 * p.beta) / (2.0 * math.sqrt(p.alpha + p.beta))


@dataclass(frozen=True)
class RhsConsistency:
    max_rel_ab: float
    ratio_cb: float
    ratio_spread: float
    n_samples: int


def rhs_consistency(p: PhysParams, r_samples, grad_sq: float = 0.0,
                    tol: float = 1e-10) -> RhsConsistency:
    """Compare the three routes to the reaction term on ``r_samples``.

    Raises DerivationError if the from-map quotient and the simplified form
    disagree by more than ``tol`` relative.
    """
    r = np.atleast_1d(np.asarray(r_samples, dtype=float))
    if np.any(np.abs(p.mu * r) > 30.0):
        raise ConfigurationError("samples must satisfy |mu r| <= 30")
    a = np.asarray(reduced_rhs_from_map(p, r, grad_sq))
    b = np.asarray(reduced_rhs(p, r, grad_sq))
    c = np.asarray(reduced_rhs_printed(p, r, grad_sq))
    scale = np.maximum(np.abs(a), np.abs(b))
    live = scale > 0
    rel = np.zeros_like(a)
    rel[live] = np.abs(a - b)[live] / scale[live]
    max_rel = float(rel.max()) if rel.size else 0.0
    if max_rel > tol:
        i = int(np.argmax(rel))
        raise DerivationError(
            f"reaction routes disagree at r={r[i]!r}: {a[i]!r} vs {b[i]!r}")
    if not np.any(live):
        return RhsConsistency(max_rel, float("nan"), 0.0, len(r))
    ratio = c[live] / b[live]
    mid = float(np.median(ratio))
    return RhsConsistency(max_rel, mid, float(np.max(np.abs(ratio / mid - 1.0))), len(r))


def _rate(p: PhysParams, values: np.ndarray, h: float) -> np.ndarray:
    grad = gradient(values, h)
    g = sum(x * x for x in grad)
    return laplacian(values, h) + reduced_rhs(p, values, g)


def step(p: PhysParams, r: np.ndarray, h: float, dt: float, boundary: Boundary,
         r0: np.ndarray | None = None, out: np.ndarray | None = None) -> np.ndarray:
    """One forward-Euler step of the reduced equation (no stability check)."""
    dirichlet = Boundary(boundary) is Boundary.DIRICHLET_FAR_FIELD
    if dirichlet and r0 is None:
        raise ConfigurationError("far-field boundary needs the pinned values r0")
    if r.ndim == 2:
        if out is None:
            out = np.empty_like(r)
        pin = r0 if dirichlet else r
        _kernels.rd_step_2d(r, out, h, dt, p.mu, p.alpha, p.beta, _shift(p), dirichlet, pin)
        return out
    new = r + dt * _rate(p, r, h)
    if dirichlet:
        ring = np.ones(r.shape, dtype=bool)
        ring[(slice(1, -1),) * r.ndim] = False
        new[ring] = r0[ring]
    if out is not None:
        out[...] = new
        return out
    return new


def solve(p: PhysParams, r0: ScalarField, cfg: SolverConfig,
          times: Sequence[float] | None = None) -> list[ScalarField]:
    """Integrate the reduced equation and return snapshots at ``times``.

    ``times`` defaults to ``[t_end]``; each interval is split into the fewest
    equal steps not exceeding ``cfg.dt``.
    """
    grid = r0.grid
    cfg.check(grid, p)
    times = [cfg.t_end] if times is None else list(times)
    if any(t > cfg.t_end * (1 + 1e-12) for t in times):
        raise ConfigurationError("snapshot times must not exceed t_end")
    pinned = np.array(r0.values)
    values = np.array(r0.values)
    buf = np.empty_like(values)
    t = r0.time
    n_done = 0
    out = []
    for target in times:
        if target < t - 1e-14:
            raise ConfigurationError("snapshot times must be ascending")
        n = int(math.ceil((target - t) / cfg.dt - 1e-9))
        if n > 0:
            dt = (target - t) / n
            for _ in range(n):
                step(p, values, grid.h, dt, cfg.boundary, pinned, buf)
                values, buf = buf, values
                n_done += 1
                peak = np.max(np.abs(values))
                if not peak <= cfg.blowup_threshold:
                    raise BlowUpError(
                        f"sup |r| = {peak:.3g} exceeds {cfg.blowup_threshold:g} "
                        f"at step {n_done}", n_done)
        t = target
        out.append(ScalarField(grid, values.copy(), t))
    return out


def lift_spin(p: PhysParams, kind: MapKind, r: ScalarField) -> SpinField:
    """``u = v(r)`` nodewise."""
    return SpinField(r.grid, eval_map_array(p, kind, r.values), r.time)


def _anisotropy(p: PhysParams, u: np.ndarray) -> np.ndarray:
    u1, u2, u3 = u[..., 0], u[..., 1], u[..., 2]
    a, b = p.alpha, p.beta
    return np.stack([a * u1 * u3 ** 2, a * u2 * u3 ** 2,
                     a * (u1 ** 2 + u2 ** 2) * u3 + b * u3], axis=-1)


def _vec_laplacian(u: np.ndarray, h: float) -> np.ndarray:
    return np.stack([laplacian(u[..., i], h) for i in range(3)], axis=-1)


def _grad_sq(u: np.ndarray, h: float) -> np.ndarray:
    return sum(sum(g * g for g in gradient(u[..., i], h)) for i in range(3))


def _interior(grid: GridSpec) -> np.ndarray:
    m = np.zeros(grid.shape, dtype=bool)
    m[grid.interior()] = True
    return m


@dataclass(frozen=True)
class LLResidual:
    """Discrete residuals of the component system and of the cross-product form.

    ``res1``/``res2`` are the two scalar equations; ``cross`` is the vector
    residual ``u_t + u x (u x F)`` with ``F = Δu - H(u)/eps^2``;
    ``cross1 = u2 R1 - u1 R2`` and ``cross2 = R3`` project it onto the same two
    equations. All arrays are zero outside the interior; ``mask`` marks
    interior nodes with ``|u3| < 1 - POLE_MARGIN``.
    """

    res1: np.ndarray
    res2: np.ndarray
    cross: np.ndarray
    cross1: np.ndarray
    cross2: np.ndarray
    mask: np.ndarray

    def norms(self) -> dict:
        m = self.mask
        if not np.any(m):
            return {"res1": 0.0, "res2": 0.0, "cross1": 0.0, "cross2": 0.0}
        return {k: float(np.max(np.abs(getattr(self, k)[m])))
                for k in ("res1", "res2", "cross1", "cross2")}


def ll_residual(p: PhysParams, u_prev: SpinField, u_next: SpinField,
                dt: float) -> LLResidual:
    """Residuals centred at the half step between two spin snapshots.

    The time derivative is the forward difference; spatial operators are
    averaged over both snapshots. With ``u_prev is u_next`` (any ``dt``) this
    measures the steady residual.
    """
    if u_prev.grid != u_next.grid:
        raise ConfigurationError("spin fields live on different grids")
    if not dt > 0:
        raise ConfigurationError("dt must be > 0")
    grid = u_prev.grid
    h, eps2 = grid.h, p.epsilon ** 2
    a, b = u_prev.spins, u_next.spins
    um = 0.5 * (a + b)
    ut = (b - a) / dt
    lap = 0.5 * (_vec_laplacian(a, h) + _vec_laplacian(b, h))
    gsq = 0.5 * (_grad_sq(a, h) + _grad_sq(b, h))
    u1, u2, u3 = um[..., 0], um[..., 1], um[..., 2]

    res1 = u2 * ut[..., 0] - u1 * ut[..., 1] - (u2 * lap[..., 0] - u1 * lap[..., 1])
    res2 = (ut[..., 2] - lap[..., 2] - gsq * u3
            + u3 * (1.0 - u3 ** 2) * (p.alpha + p.beta - 2.0 * p.alpha * u3 ** 2) / eps2)

    F = lap - _anisotropy(p, um) / eps2
    uF = np.sum(um * F, axis=-1)
    cross = ut - F + uF[..., None] * um
    cross1 = u2 * cross[..., 0] - u1 * cross[..., 1]
    cross2 = cross[..., 2]

    inner = _interior(grid)
    mask = inner & (np.abs(u3) < 1.0 - POLE_MARGIN)
    zero = ~inner
    for arr in (res1, res2, cross1, cross2):
        arr[zero] = 0.0
    cross[zero] = 0.0
    return LLResidual(res1, res2, cross, cross1, cross2, mask)


def allen_cahn_residual(p: PhysParams, r_prev: ScalarField, r_next: ScalarField,
                        dt: float, kind: MapKind = MapKind.map_ii(0.0)):
    """Residual of the bistable equation for ``omega = arcsin(v3(r))``.

    Returns ``(residual, mask)``; nodes with ``|v3| >= 1 - POLE_MARGIN`` and
    the boundary ring are masked out and set to zero.
    """
    if r_prev.grid != r_next.grid:
        raise ConfigurationError("fields live on different grids")
    grid = r_prev.grid
    v3a = eval_map_array(p, kind, r_prev.values)[..., 2]
    v3b = eval_map_array(p, kind, r_next.values)[..., 2]
    wa = np.arcsin(np.clip(v3a, -1.0, 1.0))
    wb = np.arcsin(np.clip(v3b, -1.0, 1.0))
    wm = 0.5 * (wa + wb)
    lap = 0.5 * (laplacian(wa, grid.h) + laplacian(wb, grid.h))
    s, c = np.sin(wm), np.cos(wm)
    res = ((wb - wa) / dt - lap
           + s * c * (p.alpha + p.beta - 2.0 * p.alpha * s * s) / p.epsilon ** 2)
    mask = _interior(grid) & (np.maximum(np.abs(v3a), np.abs(v3b)) < 1.0 - POLE_MARGIN)
    res[~mask] = 0.0
    return res, mask


@dataclass(frozen=True)
class ProbeRow:
    epsilon: float
    inner_dev: float
    outer_dev: float
    front_node_value: np.ndarray
    front_prediction: np.ndarray

    @property
    def front_dev(self) -> float:
        return float(np.max(np.abs(self.front_node_value - self.front_prediction)))


def asymptotic_probe(runs: Sequence[tuple[PhysParams, SpinField]], w: ScalarField,
                     margin: float, kind: MapKind) -> list[ProbeRow]:
    """Distance of each run from its predicted sharp-interface limit.

    ``w`` is the level-set function at the same time; the inner compact set is
    ``w > margin`` and the outer one ``w < -margin``. Runs are given as
    ``(params, spin field)`` pairs, one per epsilon.
    """
    inner = w.values > margin
    outer = w.values < -margin
    if not np.any(inner) or not np.any(outer):
        raise ConfigurationError(f"margin {margin} leaves an empty inner or outer mask")
    near = np.unravel_index(np.argmin(np.abs(w.values)), w.values.shape)
    rows = []
    for p, u in runs:
        if u.grid != w.grid:
            raise ConfigurationError("spin field and level-set field grids differ")
        up, down = limit_value(p, kind, 1), limit_value(p, kind, -1)
        dev_in = np.max(np.linalg.norm(u.spins[inner] - up, axis=-1))
        dev_out = np.max(np.linalg.norm(u.spins[outer] - down, axis=-1))
        rows.append(ProbeRow(p.epsilon, float(dev_in), float(dev_out),
                             np.array(u.spins[near]), limit_value(p, kind, 0)))
    return rows

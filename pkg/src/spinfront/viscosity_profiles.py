"""Barrier profiles built from the signed distance and checks against them.

``r+ = eta(d) + c t`` and ``r- = -eta(-d) - c t`` with ``c = delta / (4 t*)``.
Composed with a control map they give the upper and lower barriers for the
spin field; ``heat_defect`` and ``sandwich_check`` are numerical probes of the
inequalities those barriers are meant to satisfy.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .levelset_geometry import ScalarField, gradient, laplacian
from .reaction_diffusion import SpinField, lift_spin
from .spin_maps import MapKind, PhysParams
from .transition_profile import ProfileParams, eta

__all__ = [
    "ProfileKind",
    "ProfileField",
    "super_profile",
    "sub_profile",
    "compose_spin",
    "DefectReport",
    "smooth_mask",
    "heat_defect",
    "SandwichReport",
    "sandwich_check",
    "write_violations_csv",
]


class ProfileKind(str, Enum):
    SUPER = "super"
    SUB = "sub"


@dataclass(frozen=True)
class ProfileField:
    r: ScalarField
    kind: ProfileKind
    pp: ProfileParams
    t: float


def _check_time(pp: ProfileParams, t: float):
    if not 0.0 <= t <= pp.t_star:
        raise ConfigurationError(f"t={t} outside [0, t*={pp.t_star}]")


def super_profile(d: ScalarField, pp: ProfileParams, t: float) -> ProfileField:
    _check_time(pp, t)
    vals = eta(pp, d.values) + pp.drift_rate * t
    return ProfileField(ScalarField(d.grid, vals, t), ProfileKind.SUPER, pp, t)


def sub_profile(d: ScalarField, pp: ProfileParams, t: float) -> ProfileField:
    _check_time(pp, t)
    vals = -eta(pp, -d.values) - pp.drift_rate * t
    return ProfileField(ScalarField(d.grid, vals, t), ProfileKind.SUB, pp, t)


def compose_spin(p: PhysParams, kind: MapKind, rf: ProfileField) -> SpinField:
    return lift_spin(p, kind, rf.r)


def smooth_mask(d: ScalarField, slack: float = 5.0) -> np.ndarray:
    """Nodes where ``d`` is differentiable enough for stencils to be trusted.

    Excludes the boundary ring, a ``2h`` strip around the front and nodes
    where ``|∇d|`` is off by more than ``slack * h`` (skeleton points).
    """
    grid = d.grid
    h = grid.h
    mask = np.zeros(grid.shape, dtype=bool)
    mask[(slice(2, -2),) * grid.dim] = True
    grad = np.sqrt(sum(g * g for g in gradient(d.values, h)))
    return mask & (np.abs(d.values) > 2 * h) & (np.abs(grad - 1.0) <= slack * h)


@dataclass(frozen=True)
class DefectReport:
    """Discrete ``eta(d)_t - Δeta(d)`` at the half step between two snapshots."""

    values: np.ndarray
    mask: np.ndarray
    time: float
    bound: float
    tol: float

    @property
    def minimum(self) -> float:
        return float(self.values[self.mask].min()) if np.any(self.mask) else float("inf")

    @property
    def flagged(self) -> np.ndarray:
        """Masked nodes below ``bound - tol``."""
        return self.mask & (self.values < self.bound - self.tol)

    @property
    def ok(self) -> bool:
        return not np.any(self.flagged)


def heat_defect(d_prev: ScalarField, d_next: ScalarField, dt: float,
                pp: ProfileParams) -> DefectReport:
    if d_prev.grid != d_next.grid:
        raise ConfigurationError("distance fields live on different grids")
    if not dt > 0:
        raise ConfigurationError("dt must be > 0")
    h = d_prev.grid.h
    ea, eb = eta(pp, d_prev.values), eta(pp, d_next.values)
    vals = (eb - ea) / dt - 0.5 * (laplacian(ea, h) + laplacian(eb, h))
    mask = smooth_mask(d_prev) & smooth_mask(d_next)
    return DefectReport(vals, mask, 0.5 * (d_prev.time + d_next.time),
                        -6.0 / pp.delta, 10.0 * h / pp.delta ** 2)


@dataclass(frozen=True)
class SandwichReport:
    """Ordering violations of ``r- <= r <= r+``.

    Fractions are taken over ``mask``, the nodes outside both excluded bands;
    ``band_*`` counts cover the complement.
    """

    time: float
    n_nodes: int
    n_masked: int
    lower: np.ndarray
    upper: np.ndarray
    mask: np.ndarray
    r: np.ndarray
    rminus: np.ndarray
    rplus: np.ndarray

    @property
    def lower_masked(self) -> int:
        return int(np.count_nonzero(self.lower & self.mask))

    @property
    def upper_masked(self) -> int:
        return int(np.count_nonzero(self.upper & self.mask))

    @property
    def violation_fraction(self) -> float:
        if self.n_masked == 0:
            return 0.0
        return np.count_nonzero((self.lower | self.upper) & self.mask) / self.n_masked

    @property
    def infeasible(self) -> int:
        """Masked nodes where ``r+ < r-``, so no value of ``r`` can satisfy both."""
        return int(np.count_nonzero((self.rplus < self.rminus) & self.mask))

    def summary(self) -> dict:
        band = ~self.mask
        return {
            "time": self.time,
            "nodes": self.n_nodes,
            "masked_nodes": self.n_masked,
            "lower_violations": self.lower_masked,
            "upper_violations": self.upper_masked,
            "violation_fraction": self.violation_fraction,
            "infeasible_nodes": self.infeasible,
            "band_nodes": int(np.count_nonzero(band)),
            "band_lower_violations": int(np.count_nonzero(self.lower & band)),
            "band_upper_violations": int(np.count_nonzero(self.upper & band)),
        }


def sandwich_check(rminus: ScalarField, r: ScalarField, rplus: ScalarField,
                   pp: ProfileParams) -> SandwichReport:
    if not rminus.grid == r.grid == rplus.grid:
        raise ConfigurationError("sandwich fields live on different grids")
    d = pp.delta
    lo, mid, hi = rminus.values, r.values, rplus.values
    in_upper_band = (hi >= 0.25 * d) & (hi <= 0.5 * d)
    in_lower_band = (lo >= -0.5 * d) & (lo <= -0.25 * d)
    mask = ~(in_upper_band | in_lower_band)
    return SandwichReport(
        time=r.time,
        n_nodes=mid.size,
        n_masked=int(np.count_nonzero(mask)),
        lower=mid < lo,
        upper=mid > hi,
        mask=mask,
        r=mid,
        rminus=lo,
        rplus=hi,
    )


def write_violations_csv(report: SandwichReport, path) -> Path:
    """One row per violating node: ``t,node_index,kind,value,bound``.

    ``node_index`` is the row-major flat index; ``kind`` is ``lower`` or
    ``upper``, suffixed ``-band`` inside an excluded band.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["t", "node_index", "kind", "value", "bound"])
        r, lo, hi = report.r.ravel(), report.rminus.ravel(), report.rplus.ravel()
        mask = report.mask.ravel()
        for name, hits, bound in (("lower", report.lower.ravel(), lo),
                                  ("upper", report.upper.ravel(), hi)):
            for i in np.flatnonzero(hits):
                kind = name if mask[i] else f"{name}-band"
                out.writerow([repr(report.time), int(i), kind, repr(float(r[i])),
                              repr(float(bound[i]))])
    return path

"""Piecewise-quartic ramp ``eta`` and its derivatives.

``eta`` is constant (-5 delta / 8) below ``delta / 4``, a quartic on
``[delta / 4, delta / 2]`` and ``z - delta`` above ``delta / 2``. It is C^2;
the third derivative jumps at both junctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, JunctionPointError

__all__ = [
    "ProfileParams",
    "eta",
    "eta_d1",
    "eta_d2",
    "eta_d3",
    "band_edge",
    "band_bound",
]


@dataclass(frozen=True)
class ProfileParams:
    """Transition width ``delta`` and front extinction time ``t_star``."""

    delta: float
    t_star: float

    def __post_init__(self):
        if not (math.isfinite(self.t_star) and self.t_star > 0):
            raise ConfigurationError(f"t_star must be > 0, got {self.t_star}")
        upper = 2.0 * math.sqrt(6.0 * self.t_star)
        if not 0 < self.delta < upper:
            raise ConfigurationError(
                f"delta must lie in (0, {upper:.6g}) for t_star={self.t_star}, "
                f"got {self.delta}")

    @property
    def drift_rate(self) -> float:
        """Slope ``delta / (4 t_star)`` of the time shift in the barrier profiles."""
        return self.delta / (4.0 * self.t_star)


def _pieces(pp: ProfileParams, z):
    z = np.asarray(z, dtype=float)
    d = pp.delta
    return z, d, z <= 0.25 * d, z >= 0.5 * d


def eta(pp: ProfileParams, z):
    z, d, low, high = _pieces(pp, z)
    quartic = -32.0 * z ** 4 / d ** 3 + 48.0 * z ** 3 / d ** 2 - 24.0 * z ** 2 / d + 5.0 * z - d
    out = np.where(low, -0.625 * d, np.where(high, z - d, quartic))
    return out if out.ndim else float(out)


def eta_d1(pp: ProfileParams, z):
    z, d, low, high = _pieces(pp, z)
    mid = 16.0 / d ** 2 * (z - 0.25 * d) ** 2 * (5.0 - 8.0 * z / d)
    out = np.where(low, 0.0, np.where(high, 1.0, mid))
    return out if out.ndim else float(out)


def eta_d2(pp: ProfileParams, z):
    z, d, low, high = _pieces(pp, z)
    mid = 192.0 / d ** 2 * (z - 0.25 * d) * (1.0 - 2.0 * z / d)
    out = np.where(low | high, 0.0, mid)
    return out if out.ndim else float(out)


def eta_d3(pp: ProfileParams, z):
    """Third derivative; undefined (raises) exactly at ``delta/4`` and ``delta/2``."""
    z, d, low, high = _pieces(pp, z)
    if np.any((z == 0.25 * d) | (z == 0.5 * d)):
        raise JunctionPointError(
            f"third derivative of eta jumps at z = delta/4 and delta/2 (delta={d})")
    mid = 96.0 / d ** 2 * (3.0 - 8.0 * z / d)
    out = np.where(low | high, 0.0, mid)
    return out if out.ndim else float(out)


def band_edge(pp: ProfileParams) -> float:
    """Right end ``3d/8 + (d/8) sqrt(1 - d^2 / (24 t*))`` of the slow-slope band."""
    d = pp.delta
    return 0.375 * d + 0.125 * d * math.sqrt(1.0 - d * d / (24.0 * pp.t_star))


def band_bound(pp: ProfileParams) -> float:
    """Slope bound ``a_delta = eta'(band_edge)``; strictly below one."""
    return eta_d1(pp, band_edge(pp))

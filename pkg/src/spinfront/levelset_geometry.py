"""Level-set mean curvature flow, front extraction and signed distance.

Fields live on a uniform cube ``[-L, L]^dim`` with an odd number of points per
axis, stored as ``numpy`` arrays of shape ``(N,) * dim`` in ``ij`` order (axis
``i`` is coordinate ``x_{i+1}``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from skimage.measure import find_contours

from . import _kernels
from .errors import (
    ConfigurationError,
    DivergenceError,
    ExtinctFrontError,
    StabilityError,
)

__all__ = [
    "GridSpec",
    "ScalarField",
    "FrontPolyline",
    "build_initial_height",
    "default_sigma",
    "max_mcf_dt",
    "mcf_step",
    "evolve_mcf",
    "extract_front",
    "front_radius",
    "signed_distance",
    "analytic_sphere",
    "hausdorff_distance",
    "write_field_csv",
    "gradient",
    "laplacian",
]


@dataclass(frozen=True)
class GridSpec:
    dim: int
    L: float
    N: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.N < 3 or self.N % 2 == 0:
            raise ConfigurationError(f"N must be odd and >= 3, got {self.N}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ConfigurationError(f"half-width L must be > 0, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.N - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim

    def axis(self) -> np.ndarray:
        # symmetric and exactly zero at the centre node
        return (np.arange(self.N) - (self.N - 1) // 2) * self.h

    def mesh(self) -> list[np.ndarray]:
        ax = self.axis()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(x * x for x in self.mesh()))

    def refined(self) -> GridSpec:
        """Same box with the spacing halved."""
        return GridSpec(self.dim, self.L, 2 * self.N - 1)

    def interior(self) -> tuple[slice, ...]:
        return (slice(1, -1),) * self.dim


@dataclass(frozen=True)
class ScalarField:
    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ConfigurationError(
                f"field shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def with_values(self, values, time: float | None = None) -> ScalarField:
        return ScalarField(self.grid, values, self.time if time is None else time)

    def value_range(self) -> float:
        return float(self.values.max() - self.values.min())


@dataclass(frozen=True)
class FrontPolyline:
    """Discrete zero level set.

    ``points`` has shape ``(M, dim)``. In 2-D ``segments`` holds the
    marching-squares pieces with shape ``(S, 2, 2)``; in 1-D and 3-D it is
    ``None`` and ``points`` are edge crossings.
    """

    dim: int
    points: np.ndarray
    segments: np.ndarray | None = field(default=None)

    @property
    def is_empty(self) -> bool:
        return len(self.points) == 0


def build_initial_height(grid: GridSpec, R: float) -> ScalarField:
    """``R - |x|``: positive inside the ball of radius ``R``."""
    if not 0 < R < 0.8 * grid.L:
        raise ConfigurationError(
            f"radius must satisfy 0 < R < 0.8 L = {0.8 * grid.L:g}, got {R}")
    return ScalarField(grid, R - grid.radius(), 0.0)


def default_sigma(w: ScalarField) -> float:
    return 1e-6 * w.value_range() / w.grid.h


def max_mcf_dt(grid: GridSpec) -> float:
    return 0.2 * grid.h ** 2 / (2 * grid.dim)


def _padded(values: np.ndarray) -> np.ndarray:
    return np.pad(values, 1, mode="reflect")


def _shift(g: np.ndarray, offsets) -> np.ndarray:
    idx = tuple(slice(1 + o, g.shape[k] - 1 + o) for k, o in enumerate(offsets))
    return g[idx]


def gradient(values: np.ndarray, h: float) -> list[np.ndarray]:
    """Central first differences with mirror ghost nodes."""
    g = _padded(values)
    dim = values.ndim
    out = []
    for a in range(dim):
        e = [0] * dim
        e[a] = 1
        m = [0] * dim
        m[a] = -1
        out.append((_shift(g, e) - _shift(g, m)) / (2.0 * h))
    return out


def laplacian(values: np.ndarray, h: float) -> np.ndarray:
    g = _padded(values)
    dim = values.ndim
    acc = -2.0 * dim * values
    for a in range(dim):
        e = [0] * dim
        e[a] = 1
        m = [0] * dim
        m[a] = -1
        acc = acc + _shift(g, e) + _shift(g, m)
    return acc / h ** 2


def _hessian(values: np.ndarray, h: float):
    g = _padded(values)
    dim = values.ndim
    hess = {}
    for a in range(dim):
        for b in range(a, dim):
            if a == b:
                e = [0] * dim
                e[a] = 1
                m = [0] * dim
                m[a] = -1
                hess[a, a] = (_shift(g, e) - 2.0 * values + _shift(g, m)) / h ** 2
            else:
                def off(sa, sb):
                    o = [0] * dim
                    o[a], o[b] = sa, sb
                    return _shift(g, o)
                hess[a, b] = (off(1, 1) - off(1, -1) - off(-1, 1) + off(-1, -1)) / (4 * h * h)
    return hess


def _mcf_rate(values: np.ndarray, h: float, sigma: float) -> np.ndarray:
    dim = values.ndim
    grad = gradient(values, h)
    hess = _hessian(values, h)
    lap = sum(hess[a, a] for a in range(dim))
    num = np.zeros_like(values)
    for a in range(dim):
        for b in range(dim):
            num += grad[a] * grad[b] * hess[min(a, b), max(a, b)]
    return lap - num / (sum(gi * gi for gi in grad) + sigma * sigma)


def _check_dt(grid: GridSpec, dt: float):
    bound = max_mcf_dt(grid)
    if not 0 < dt <= bound * (1 + 1e-12):
        raise StabilityError(f"mcf dt={dt:g} violates 0 < dt <= {bound:g}")


def mcf_step(w: ScalarField, dt: float, sigma: float, step_index: int | None = None,
             use_kernel: bool = True) -> ScalarField:
    """One forward-Euler step of the regularized level-set curvature flow."""
    _check_dt(w.grid, dt)
    if not sigma > 0:
        raise ConfigurationError("sigma must be > 0")
    if use_kernel and w.grid.dim == 2:
        out = np.empty_like(w.values)
        _kernels.mcf_step_2d(np.ascontiguousarray(w.values), out, w.grid.h, dt, sigma * sigma)
    else:
        out = w.values + dt * _mcf_rate(w.values, w.grid.h, sigma)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(f"non-finite level-set value at step {step_index}", step_index)
    return ScalarField(w.grid, out, w.time + dt)


def evolve_mcf(w0: ScalarField, times, dt: float | None = None,
               sigma: float | None = None) -> list[ScalarField]:
    """Integrate to each of ``times`` (ascending) and return those snapshots.

    The step is the largest stable one that lands exactly on every requested
    time.
    """
    grid = w0.grid
    dt_max = max_mcf_dt(grid) if dt is None else dt
    _check_dt(grid, dt_max)
    sig = default_sigma(w0) if sigma is None else sigma
    values = np.array(w0.values)
    t = w0.time
    step = 0
    out = []
    fast = grid.dim == 2
    buf = np.empty_like(values)
    for target in times:
        if target < t - 1e-14:
            raise ConfigurationError("snapshot times must be ascending")
        n = int(math.ceil((target - t) / dt_max - 1e-9))
        if n > 0:
            h_dt = (target - t) / n
            for _ in range(n):
                if fast:
                    _kernels.mcf_step_2d(values, buf, grid.h, h_dt, sig * sig)
                    values, buf = buf, values
                else:
                    values = values + h_dt * _mcf_rate(values, grid.h, sig)
                step += 1
            if not np.all(np.isfinite(values)):
                raise DivergenceError(f"non-finite level-set value by step {step}", step)
        t = target
        out.append(ScalarField(grid, values.copy(), t))
    return out


def _crossings_along(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    ax = grid.axis()
    n = values.shape[axis]
    lo = np.take(values, np.arange(n - 1), axis=axis)
    hi = np.take(values, np.arange(1, n), axis=axis)
    change = (lo > 0) != (hi > 0)
    idx = np.nonzero(change)
    if len(idx[0]) == 0:
        return np.empty((0, grid.dim))
    a, b = lo[idx], hi[idx]
    frac = a / (a - b)
    pts = np.empty((len(a), grid.dim))
    for k in range(grid.dim):
        pts[:, k] = ax[idx[k]]
    pts[:, axis] += frac * grid.h
    return pts


def extract_front(w: ScalarField) -> FrontPolyline:
    """Zero level set by linear interpolation along grid edges.

    A crossing is recorded wherever the field changes between positive and
    non-positive. Returns an empty front when there is no sign change.
    """
    grid = w.grid
    if grid.dim == 2:
        ax0 = -(grid.N - 1) // 2 * grid.h
        segs = []
        for contour in find_contours(w.values, 0.0):
            xy = ax0 + contour * grid.h
            if len(xy) > 1:
                segs.append(np.stack([xy[:-1], xy[1:]], axis=1))
        if not segs:
            return FrontPolyline(2, np.empty((0, 2)), np.empty((0, 2, 2)))
        segments = np.concatenate(segs)
        points = np.concatenate([s[:, 0] for s in segs] + [s[-1:, 1] for s in segs])
        return FrontPolyline(2, points, segments)
    pts = np.concatenate([_crossings_along(w.values, grid, a) for a in range(grid.dim)])
    return FrontPolyline(grid.dim, pts)


def front_radius(front: FrontPolyline) -> float:
    """Mean distance of the front points from the origin."""
    if front.is_empty:
        raise ExtinctFrontError("front is empty")
    return float(np.mean(np.linalg.norm(front.points, axis=1)))


def _segment_distance(nodes: np.ndarray, segs: np.ndarray) -> np.ndarray:
    a = segs[:, 0]
    ab = segs[:, 1] - a
    len2 = np.einsum("ij,ij->i", ab, ab)
    len2 = np.where(len2 > 0, len2, 1.0)
    out = np.empty(len(nodes))
    chunk = max(1, 2_000_000 // max(len(segs), 1))
    for s in range(0, len(nodes), chunk):
        p = nodes[s:s + chunk, None, :] - a[None]
        t = np.clip(np.einsum("nsk,sk->ns", p, ab) / len2, 0.0, 1.0)
        diff = p - t[..., None] * ab[None]
        out[s:s + chunk] = np.sqrt(np.min(np.einsum("nsk,nsk->ns", diff, diff), axis=1))
    return out


def _point_distance(nodes: np.ndarray, pts: np.ndarray) -> np.ndarray:
    out = np.empty(len(nodes))
    chunk = max(1, 2_000_000 // max(len(pts), 1))
    for s in range(0, len(nodes), chunk):
        diff = nodes[s:s + chunk, None, :] - pts[None]
        out[s:s + chunk] = np.sqrt(np.min(np.einsum("nsk,nsk->ns", diff, diff), axis=1))
    return out


def signed_distance(front: FrontPolyline, w: ScalarField) -> ScalarField:
    """Brute-force distance to the front, positive where ``w > 0``."""
    if front.is_empty:
        raise ExtinctFrontError(f"cannot build a distance field at t={w.time}: front is empty")
    grid = w.grid
    nodes = np.stack([x.ravel() for x in grid.mesh()], axis=1)
    if front.segments is not None and len(front.segments):
        dist = _segment_distance(nodes, front.segments)
    else:
        dist = _point_distance(nodes, front.points)
    d = np.sign(w.values) * dist.reshape(grid.shape)
    return ScalarField(grid, d, w.time)


def analytic_sphere(R0: float, dim: int, t: float) -> float:
    """Radius of a sphere shrinking by mean curvature: ``sqrt(R0^2 - 2(dim-1)t)``."""
    if dim < 1:
        raise ConfigurationError("dim must be >= 1")
    if dim == 1:
        return float(R0)
    t_star = R0 * R0 / (2 * (dim - 1))
    if t > t_star:
        raise ExtinctFrontError(f"t={t} is beyond the extinction time {t_star}")
    return math.sqrt(max(R0 * R0 - 2 * (dim - 1) * t, 0.0))


def hausdorff_distance(a: FrontPolyline, b: FrontPolyline) -> float:
    if a.is_empty or b.is_empty:
        raise ExtinctFrontError("Hausdorff distance of an empty front")
    return float(max(_point_distance(a.points, b.points).max(),
                     _point_distance(b.points, a.points).max()))


def write_field_csv(field: ScalarField, path) -> Path:
    """Write ``x1,...,xdim,value`` rows in row-major order."""
    path = Path(path)
    grid = field.grid
    cols = [x.ravel() for x in grid.mesh()] + [field.values.ravel()]
    header = ",".join([f"x{k + 1}" for k in range(grid.dim)] + ["value"])
    np.savetxt(path, np.stack(cols, axis=1), delimiter=",", header=header,
               comments="", fmt="%.17g")
    return path


def with_time(field: ScalarField, t: float) -> ScalarField:
    return replace(field, time=t)

"""Named experiment pipelines and their pass/fail checks.

Each runner takes a validated :class:`Scenario`, writes its artifacts into
``scenario.output_dir`` and returns a list of :class:`Check` rows. The runners
are deterministic: no randomness, no timing in any written value.
"""

from __future__ import annotations

import csv
import json
import math
import subprocess
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError, DegeneratePoleError
from .levelset_geometry import (
    GridSpec,
    ScalarField,
    analytic_sphere,
    build_initial_height,
    evolve_mcf,
    extract_front,
    front_radius,
    signed_distance,
    write_field_csv,
)
from .reaction_diffusion import (
    Boundary,
    SolverConfig,
    allen_cahn_residual,
    asymptotic_probe,
    lift_spin,
    ll_residual,
    rhs_consistency,
    solve,
)
from .spin_maps import (
    MAP_I,
    MapKind,
    PhysParams,
    critical_point_v3,
    eval_map_array,
    limit_value,
    map_jet,
    ode_residuals,
    wronskian,
)
from .transition_profile import ProfileParams, band_bound, eta, eta_d1, eta_d2, eta_d3
from .viscosity_profiles import (
    compose_spin,
    heat_defect,
    sandwich_check,
    sub_profile,
    super_profile,
    write_violations_csv,
)

__all__ = [
    "SCENARIOS",
    "Check",
    "Scenario",
    "SolverSpec",
    "scenario_from_dict",
    "run_scenario",
    "write_summary",
    "write_manifest",
    "git_describe",
]


@dataclass(frozen=True)
class Check:
    """One assertion row of ``summary.csv``."""

    name: str
    invariant: str
    measured: float
    bound: str
    passed: bool

    def row(self) -> list[str]:
        return [self.name, self.invariant, repr(float(self.measured)), self.bound,
                "true" if self.passed else "false"]


def _le(name, invariant, measured, bound) -> Check:
    return Check(name, invariant, float(measured), f"<= {bound!r}", bool(measured <= bound))


def _lt(name, invariant, measured, bound) -> Check:
    return Check(name, invariant, float(measured), f"< {bound!r}", bool(measured < bound))


def _ge(name, invariant, measured, bound) -> Check:
    return Check(name, invariant, float(measured), f">= {bound!r}", bool(measured >= bound))


@dataclass(frozen=True)
class SolverSpec:
    """Solver settings before a grid is known; ``dt=None`` means the stable maximum."""

    t_end: float = 0.2
    dt: float | None = None
    boundary: Boundary = Boundary.REFLECTIVE
    blowup_threshold: float = 1e3

    def build(self, grid: GridSpec, p: PhysParams, t_end: float | None = None) -> SolverConfig:
        dt = SolverConfig.max_dt(grid, p) if self.dt is None else self.dt
        cfg = SolverConfig(dt, self.t_end if t_end is None else t_end,
                           self.boundary, self.blowup_threshold)
        cfg.check(grid, p)
        return cfg


@dataclass(frozen=True)
class Scenario:
    name: str
    params: PhysParams
    profile: ProfileParams
    grid: GridSpec
    solver: SolverSpec
    output_dir: Path
    radius: float = 1.0
    options: dict = field(default_factory=dict)

    def opt(self, key, default):
        return self.options.get(key, default)

    def describe(self) -> dict:
        solver = asdict(self.solver)
        solver["boundary"] = self.solver.boundary.value
        return {
            "scenario": self.name,
            "params": asdict(self.params),
            "profile": asdict(self.profile),
            "grid": asdict(self.grid),
            "solver": solver,
            "radius": self.radius,
            "options": self.options,
        }


DEFAULTS = {
    "params": {"alpha": 0.0, "beta": 2.0, "epsilon": 0.1},
    "grid": {"dim": 2, "L": 1.6, "N": 201},
    "radius": 1.0,
    "profile": {"delta": 0.2},
}


def scenario_from_dict(raw: dict, overrides: dict | None = None) -> Scenario:
    """Build a scenario from a config mapping plus CLI overrides.

    Recognised override keys: ``epsilon``, ``grid_n``, ``delta``, ``out``.
    """
    if not isinstance(raw, dict) or "scenario" not in raw or not isinstance(raw["scenario"], dict):
        raise ConfigurationError("config must hold a single top-level 'scenario' object")
    sc = raw["scenario"]
    name = sc.get("name")
    if name not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    try:
        params = {**DEFAULTS["params"], **sc.get("params", {})}
        if "epsilon" in overrides:
            params["epsilon"] = overrides["epsilon"]
        grid = {**DEFAULTS["grid"], **sc.get("grid", {})}
        if "grid_n" in overrides:
            grid["N"] = overrides["grid_n"]
        radius = float(sc.get("radius", DEFAULTS["radius"]))
        g = GridSpec(int(grid["dim"]), float(grid["L"]), int(grid["N"]))
        prof = {**DEFAULTS["profile"], **sc.get("profile", {})}
        if "delta" in overrides:
            prof["delta"] = overrides["delta"]
        if "t_star" not in prof:
            prof["t_star"] = (radius ** 2 / (2 * (g.dim - 1))) if g.dim > 1 else 1.0
        solver = dict(sc.get("solver", {}))
        if "boundary" in solver:
            solver["boundary"] = Boundary(solver["boundary"])
        out = overrides.get("out", sc.get("output_dir", f"out/{name}"))
        return Scenario(
            name=name,
            params=PhysParams(float(params["alpha"]), float(params["beta"]),
                              float(params["epsilon"])),
            profile=ProfileParams(float(prof["delta"]), float(prof["t_star"])),
            grid=g,
            solver=SolverSpec(**solver),
            output_dir=Path(out),
            radius=radius,
            options=dict(sc.get("options", {})),
        )
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid scenario configuration: {exc}") from exc


# ---------------------------------------------------------------- helpers

def _strictly_decreasing(values) -> tuple[float, bool]:
    """Largest successive ratio, and whether every step strictly decreases.

    A sequence that is identically zero counts as decreasing (ratio 0).
    """
    v = np.asarray(values, dtype=float)
    if np.all(v == 0):
        return 0.0, True
    ratios = [b / a if a > 0 else math.inf for a, b in zip(v[:-1], v[1:])]
    worst = max(ratios)
    return float(worst), bool(np.all(np.diff(v) < 0))


def _sphere_runs(sc: Scenario, times):
    w0 = build_initial_height(sc.grid, sc.radius)
    return w0, evolve_mcf(w0, times)


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        out.writerows(rows)
    return path


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- runners

def run_identities(sc: Scenario) -> tuple[list[Check], list[Path]]:
    sets = [tuple(x) for x in sc.opt("param_sets", [[0, 2], [1, 2], [3, 1]])]
    eps_list = sc.opt("epsilons", [0.2, 0.1, 0.05])
    n = int(sc.opt("samples", 1000))
    span = float(sc.opt("mu_r_span", 50.0))
    checks, rows = [], []
    for a, b in sets:
        for e in eps_list:
            p = PhysParams(float(a), float(b), float(e))
            tag = f"a={a:g},b={b:g},eps={e:g}"
            r = np.linspace(-span, span, n) / p.mu
            kinds = (MAP_I, MapKind.map_ii(0.0), MapKind.map_ii(math.pi / 4))
            vals = [eval_map_array(p, k, r) for k in kinds]
            norm_dev = max(float(np.max(np.abs(np.linalg.norm(v, axis=-1) - 1))) for v in vals)
            v3_max = max(float(np.max(np.abs(v[..., 2]))) for v in vals)
            w_ref = -p.mu * math.sin(e ** 2)
            w_err = float(np.max(np.abs(wronskian(p, MAP_I, r) - w_ref)) / abs(w_ref))
            w2 = max(float(np.max(np.abs(wronskian(p, k, r)))) for k in kinds[1:])
            worst = 0.0
            skipped = 0
            for k in kinds:
                for ri in r:
                    try:
                        worst = max(worst, *ode_residuals(p, k, float(ri)).relative())
                    except DegeneratePoleError:
                        skipped += 1
            rstar = critical_point_v3(p)

            def dv3(x, p=p):
                return float(map_jet(p, MAP_I, x).dv[2])

            root = brentq(dv3, rstar - e, rstar + e, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            bound = e * abs(math.log(0.25 * b * b)) / (4 * math.sqrt(a + b))
            checks += [
                _le(f"unit_norm[{tag}]", "spin_maps.unit_norm", norm_dev, 1e-12),
                _lt(f"v3_below_pole[{tag}]", "spin_maps.v3_not_pole", v3_max, 1.0),
                _le(f"wronskian_map1_rel[{tag}]", "spin_maps.wronskian_map1", w_err, 1e-8),
                _le(f"wronskian_map2_abs[{tag}]", "spin_maps.wronskian_map2", w2, 0.0),
                _le(f"ode_residual_rel[{tag}]", "spin_maps.ode_residuals", worst, 1e-6),
                _le(f"critical_point_vs_root[{tag}]", "spin_maps.critical_point",
                    abs(rstar - root) / e, 1e-10),
                _le(f"critical_point_excess[{tag}]", "spin_maps.critical_point_limit",
                    (abs(rstar) - bound) / e, e ** 2),
            ]
            rows.append([a, b, e, _fmt(norm_dev), _fmt(w_err), _fmt(w2), _fmt(worst),
                         skipped, _fmt(rstar), _fmt(root)])
    path = _write_csv(sc.output_dir / "identities.csv",
                      ["alpha", "beta", "epsilon", "unit_norm_dev", "wronskian1_rel",
                       "wronskian2_abs", "ode_residual_rel", "pole_skips", "r_star",
                       "r_star_bisection"], rows)
    return checks, [path]


def run_profile_checks(sc: Scenario) -> tuple[list[Check], list[Path]]:
    pp = sc.profile
    d = pp.delta
    checks = []
    jumps = []
    for z in (0.25 * d, 0.5 * d):
        lo, hi = np.nextafter(z, -np.inf), np.nextafter(z, np.inf)
        for f in (eta, eta_d1, eta_d2):
            jumps.append(abs(f(pp, hi) - f(pp, lo)))
    checks.append(_le("eta_c2_junction_jump", "transition_profile.c2", max(jumps), 1e-12 / d ** 2))
    peak = eta_d2(pp, 0.375 * d)
    checks.append(_le("eta_d2_peak_value", "transition_profile.max_second_derivative",
                      abs(peak - 6 / d) / (6 / d), 1e-10))
    checks.append(_le("eta_d3_at_peak", "transition_profile.max_second_derivative",
                      abs(eta_d3(pp, 0.375 * d)) * d ** 3, 1e-10))
    z = np.linspace(-d, 2 * d, 10_000)
    checks.append(_le("eta_d2_sweep_max", "transition_profile.max_second_derivative",
                      float(np.max(eta_d2(pp, z))) - 6 / d, 1e-10 * 6 / d))
    slope = eta_d1(pp, z)
    checks.append(_ge("eta_d1_min", "transition_profile.monotone", float(slope.min()), 0.0))
    checks.append(_le("eta_d1_max", "transition_profile.slope_bound", float(slope.max()), 1.0))
    a = band_bound(pp)
    checks.append(_lt("band_bound", "transition_profile.band_bound", a, 1.0))
    path = _write_csv(sc.output_dir / "eta.csv", ["z", "eta", "eta_d1", "eta_d2"],
                      [[_fmt(zi), _fmt(e0), _fmt(e1), _fmt(e2)] for zi, e0, e1, e2 in
                       zip(z[::50], eta(pp, z[::50]), slope[::50], eta_d2(pp, z[::50]))])
    return checks, [path]


def run_mcf_sphere(sc: Scenario) -> tuple[list[Check], list[Path]]:
    times = [float(t) for t in sc.opt("times", [0.1, 0.2, 0.3, 0.4])]
    _, snaps = _sphere_runs(sc, times)
    rows, checks, paths = [], [], []
    radii = []
    for s in snaps:
        rad = front_radius(extract_front(s))
        exact = analytic_sphere(sc.radius, sc.grid.dim, s.time)
        err = abs(rad - exact) / exact
        radii.append(rad)
        rows.append([_fmt(s.time), _fmt(rad), _fmt(exact), _fmt(err)])
        checks.append(_le(f"sphere_radius_rel_err[t={s.time:g}]", "levelset_geometry.sphere_benchmark",
                          err, 0.02))
        p = write_field_csv(s, sc.output_dir / f"w_t{s.time:.3f}.csv")
        paths.append(p)
    shrink = max(b - a for a, b in zip(radii[:-1], radii[1:])) if len(radii) > 1 else -1.0
    checks.append(_lt("sphere_radius_max_increment", "levelset_geometry.monotone_shrinkage", shrink, 0.0))
    paths.insert(0, _write_csv(sc.output_dir / "radius.csv",
                               ["t", "radius", "analytic", "rel_err"], rows))
    return checks, paths


def run_defect_check(sc: Scenario) -> tuple[list[Check], list[Path]]:
    times = [float(t) for t in sc.opt("times", [0.1, 0.2])]
    half = float(sc.opt("half_gap", 0.01))
    stamps = sorted({round(t + s * half, 12) for t in times for s in (-1, 1)})
    _, snaps = _sphere_runs(sc, stamps)
    dist = {round(s.time, 12): signed_distance(extract_front(s), s) for s in snaps}
    pp = sc.profile
    h = sc.grid.h
    checks, rows = [], []
    for t in times:
        a, b = dist[round(t - half, 12)], dist[round(t + half, 12)]
        rep = heat_defect(a, b, 2 * half, pp)
        checks.append(_ge(f"heat_defect_min[t={t:g}]", "viscosity_profiles.heat_defect",
                          rep.minimum, rep.bound - rep.tol))
        linear = rep.mask & (a.values > 0.5 * pp.delta + h) & (b.values > 0.5 * pp.delta + h)
        lin_min = float(rep.values[linear].min()) if np.any(linear) else 0.0
        checks.append(_ge(f"heat_defect_linear_inside_min[t={t:g}]",
                          "viscosity_profiles.heat_defect_linear", lin_min, -rep.tol))
        rows.append([_fmt(t), _fmt(rep.minimum), _fmt(rep.bound), _fmt(rep.tol),
                     int(rep.mask.sum()), int(rep.flagged.sum()), _fmt(lin_min)])
    path = _write_csv(sc.output_dir / "defect.csv",
                      ["t", "min_defect", "bound", "tol", "masked_nodes", "flagged_nodes",
                       "min_defect_linear_inside"], rows)
    return checks, [path]


def run_limit_sweep(sc: Scenario) -> tuple[list[Check], list[Path]]:
    eps_list = [float(e) for e in sc.opt("epsilons", [0.2, 0.1, 0.05, 0.02])]
    r_vals = [float(r) for r in sc.opt("r_values", [0.1, -0.1])]
    ks = [float(k) for k in sc.opt("k_values", [0.0, math.pi / 4])]
    a, b = sc.params.alpha, sc.params.beta
    checks, rows = [], []
    for k in ks:
        kind = MapKind.map_ii(k)
        for r in r_vals:
            errs = []
            for e in eps_list:
                p = PhysParams(a, b, e)
                v = eval_map_array(p, kind, r)
                target = limit_value(p, kind, int(np.sign(r)))
                errs.append(np.abs(v - target))
                rows.append(["II", _fmt(k), _fmt(r), _fmt(e), *map(_fmt, v)])
            errs = np.array(errs)
            for c in range(3):
                ratio, ok = _strictly_decreasing(errs[:, c])
                checks.append(Check(f"map2_limit_error_ratio[k={k:.4g},r={r:g},c={c + 1}]",
                                    "spin_maps.limit_map2", ratio, "strictly decreasing", ok))
    for r in r_vals:
        mags = []
        for e in eps_list:
            v = eval_map_array(PhysParams(a, b, e), MAP_I, r)
            mags.append(v)
            rows.append(["I", "", _fmt(r), _fmt(e), *map(_fmt, v)])
        mags = np.array(mags)
        series = {"1-|v2|": 1 - np.abs(mags[:, 1]), "|v1|": np.abs(mags[:, 0]),
                  "|v3|": np.abs(mags[:, 2])}
        for label, s in series.items():
            ratio, ok = _strictly_decreasing(s)
            checks.append(Check(f"map1_limit_{label}_ratio[r={r:g}]", "spin_maps.limit_map1",
                                ratio, "strictly decreasing", ok))
        sign = float(np.sign(mags[-1, 1]))
        checks.append(Check(f"map1_observed_sign_v2[r={r:g}]", "spin_maps.limit_map1_sign",
                            sign, "recorded", True))
    path = _write_csv(sc.output_dir / "limits.csv", ["map", "k", "r", "epsilon", "v1", "v2", "v3"], rows)
    return checks, [path]


def residual_equivalence(p: PhysParams, grid: GridSpec, kind: MapKind = MAP_I) -> dict:
    """Steady residuals of the lifted planar profile ``r = x1`` on ``grid`` and its refinement."""
    out = {}
    for label, g in (("coarse", grid), ("fine", grid.refined())):
        u = lift_spin(p, kind, ScalarField(g, g.mesh()[0]))
        res = ll_residual(p, u, u, 1.0)
        m = res.mask
        comp = np.stack([res.res1, res.res2], axis=-1)[m]
        cross = np.stack([res.cross1, res.cross2], axis=-1)[m]
        out[label] = {
            "component_norm": float(np.max(np.linalg.norm(comp, axis=-1))),
            "cross_norm": float(np.max(np.linalg.norm(cross, axis=-1))),
            "difference": float(np.max(np.linalg.norm(comp - cross, axis=-1))),
            "nodes": int(m.sum()),
        }
    return out


def run_planar_steady(sc: Scenario) -> tuple[list[Check], list[Path]]:
    p, g = sc.params, sc.grid
    steps = int(sc.opt("steps", 100))
    x1 = g.mesh()[0]
    r0 = ScalarField(g, x1)
    dt = SolverConfig.max_dt(g, p) if sc.solver.dt is None else sc.solver.dt
    cfg = SolverConfig(dt, steps * dt, Boundary.DIRICHLET_FAR_FIELD, sc.solver.blowup_threshold)
    r = solve(p, r0, cfg)[-1]
    drift = float(np.max(np.abs(r.values - x1)[g.interior()]))
    checks = [_le("planar_interior_drift", "reaction_diffusion.planar_invariance", drift, 1e-6)]

    samples = np.linspace(-30.0, 30.0, 100) / p.mu
    rc = rhs_consistency(p, samples)
    expected = 2 * (p.alpha + p.beta)
    checks += [
        _le("rhs_route_a_vs_b_rel", "reaction_diffusion.rhs_consistency", rc.max_rel_ab, 1e-10),
        _le("rhs_printed_ratio_spread", "reaction_diffusion.rhs_consistency", rc.ratio_spread, 1e-8),
        Check("rhs_printed_ratio_value", "reaction_diffusion.rhs_consistency", rc.ratio_cb,
              f"expected {expected!r}", bool(abs(rc.ratio_cb / expected - 1) <= 1e-8)),
    ]

    eq = residual_equivalence(p, g)
    c, f = eq["coarse"], eq["fine"]
    for key, inv in (("component_norm", "reaction_diffusion.ll_residual_order"),
                     ("cross_norm", "reaction_diffusion.cross_residual_order")):
        ratio = c[key] / f[key] if f[key] > 0 else math.inf
        checks.append(Check(f"residual_refinement_ratio[{key}]", inv, ratio, "in [3.5, 4.5]",
                            bool(3.5 <= ratio <= 4.5)))
    for label, e in eq.items():
        bound = min(e["component_norm"], e["cross_norm"])
        checks.append(_lt(f"residual_form_difference[{label}]",
                          "reaction_diffusion.formulation_equivalence", e["difference"], bound))

    kind2 = MapKind.map_ii(0.0)
    ac, mask = allen_cahn_residual(p, r0, r0, 1.0, kind2)
    report = {
        "interior_drift": drift,
        "rhs_consistency": asdict(rc),
        "residual_equivalence": eq,
        "allen_cahn_residual_max": float(np.max(np.abs(ac[mask]))) if np.any(mask) else 0.0,
        "allen_cahn_masked_nodes": int(mask.sum()),
    }
    path = sc.output_dir / "planar_report.json"
    path.write_text(json.dumps(report, indent=2, sort_keys=True))
    return checks, [path, write_field_csv(r, sc.output_dir / "r_final.csv")]


def _zero_set_radius(r: ScalarField) -> float:
    return front_radius(extract_front(r))


def run_front_capture(sc: Scenario) -> tuple[list[Check], list[Path]]:
    p, pp, g = sc.params, sc.profile, sc.grid
    t_sand = float(sc.opt("sandwich_time", 0.1))
    t_end = sc.solver.t_end
    times = sorted({t_sand, t_end})
    w0, snaps = _sphere_runs(sc, times)
    mcf = dict(zip(times, snaps))
    d0 = signed_distance(extract_front(w0), w0)
    cfg = sc.solver.build(g, p)
    rs = dict(zip(times, solve(p, ScalarField(g, eta(pp, d0.values)), cfg, times)))
    checks, paths = [], []
    peak = max(float(np.max(np.abs(r.values))) for r in rs.values())
    checks.append(_le("reduced_solution_sup", "reaction_diffusion.stability", peak,
                      sc.solver.blowup_threshold))
    track = abs(_zero_set_radius(rs[t_end]) - front_radius(extract_front(mcf[t_end])))
    checks.append(_le(f"zero_set_tracking[t={t_end:g}]", "reaction_diffusion.front_tracking",
                      track, 2 * (pp.delta + p.epsilon)))

    d = signed_distance(extract_front(mcf[t_sand]), mcf[t_sand])
    rep = sandwich_check(sub_profile(d, pp, t_sand).r, rs[t_sand],
                         super_profile(d, pp, t_sand).r, pp)
    checks.append(_le(f"sandwich_violation_fraction[t={t_sand:g}]", "viscosity_profiles.sandwich",
                      rep.violation_fraction, 0.01))
    stats = sc.output_dir / "sandwich_report.json"
    stats.write_text(json.dumps(rep.summary(), indent=2, sort_keys=True))
    paths += [stats, write_violations_csv(rep, sc.output_dir / "sandwich_violations.csv")]

    d_end = signed_distance(extract_front(mcf[t_end]), mcf[t_end])
    margin = float(sc.opt("margin", 0.15))
    probe_rows = []
    for prof in (super_profile(d_end, pp, t_end), sub_profile(d_end, pp, t_end)):
        u = compose_spin(p, MAP_I, prof)
        row = asymptotic_probe([(p, u)], mcf[t_end], margin, MAP_I)[0]
        probe_rows.append([prof.kind.value, _fmt(row.inner_dev), _fmt(row.outer_dev),
                           *map(_fmt, row.front_node_value), *map(_fmt, row.front_prediction)])
    paths.append(_write_csv(sc.output_dir / "map1_probe.csv",
                            ["profile", "inner_dev", "outer_dev", "u1", "u2", "u3",
                             "pred1", "pred2", "pred3"], probe_rows))
    for t, r in rs.items():
        paths.append(write_field_csv(r, sc.output_dir / f"r_t{t:.3f}.csv"))
    return checks, paths


def run_map2_asymptotics(sc: Scenario) -> tuple[list[Check], list[Path]]:
    pp, g = sc.profile, sc.grid
    a, b = sc.params.alpha, sc.params.beta
    kind = MapKind.map_ii(float(sc.opt("k", 0.0)))
    eps_list = [float(e) for e in sc.opt("epsilons", [0.2, 0.1, 0.05])]
    margin = float(sc.opt("margin", 0.15))
    t_end = sc.solver.t_end
    w0, (w_end,) = _sphere_runs(sc, [t_end])
    d0 = signed_distance(extract_front(w0), w0)
    r0 = ScalarField(g, eta(pp, d0.values))
    runs = []
    for e in eps_list:
        p = PhysParams(a, b, e)
        r = solve(p, r0, sc.solver.build(g, p))[-1]
        runs.append((p, lift_spin(p, kind, r)))
    table = asymptotic_probe(runs, w_end, margin, kind)
    checks = []
    inner = [row.inner_dev for row in table]
    outer = [row.outer_dev for row in table]
    tol = float(sc.opt("tolerance", 0.05))
    checks.append(_le(f"inner_deviation[eps={eps_list[-1]:g}]", "reaction_diffusion.limit_inner",
                      inner[-1], tol))
    checks.append(_le(f"outer_deviation[eps={eps_list[-1]:g}]", "reaction_diffusion.limit_outer",
                      outer[-1], tol))
    for label, series in (("inner", inner), ("outer", outer)):
        ratio, ok = _strictly_decreasing(series)
        checks.append(Check(f"{label}_deviation_ratio", f"reaction_diffusion.limit_{label}",
                            ratio, "strictly decreasing", ok))
    last = table[-1]
    checks.append(_le(f"front_node_u3_error[eps={eps_list[-1]:g}]", "reaction_diffusion.limit_front",
                      abs(last.front_node_value[2] - last.front_prediction[2]), 0.1))
    rows = [[_fmt(r.epsilon), _fmt(r.inner_dev), _fmt(r.outer_dev),
             *map(_fmt, r.front_node_value), *map(_fmt, r.front_prediction)] for r in table]
    path = _write_csv(sc.output_dir / "asymptotics.csv",
                      ["epsilon", "inner_dev", "outer_dev", "u1", "u2", "u3",
                       "pred1", "pred2", "pred3"], rows)
    return checks, [path]


SCENARIOS: dict[str, Callable[[Scenario], tuple[list[Check], list[Path]]]] = {
    "identities": run_identities,
    "profile-checks": run_profile_checks,
    "mcf-sphere": run_mcf_sphere,
    "defect-check": run_defect_check,
    "limit-sweep": run_limit_sweep,
    "planar-steady": run_planar_steady,
    "front-capture": run_front_capture,
    "map2-asymptotics": run_map2_asymptotics,
}


def run_scenario(sc: Scenario) -> tuple[list[Check], list[Path]]:
    sc.output_dir.mkdir(parents=True, exist_ok=True)
    return SCENARIOS[sc.name](sc)


def write_summary(checks: list[Check], path: Path) -> Path:
    return _write_csv(path, ["name", "invariant", "measured", "bound", "pass"],
                      [c.row() for c in checks])


def git_describe(cwd: Path | None = None) -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=cwd or Path(__file__).parent, capture_output=True,
                             text=True, timeout=10)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return out.stdout.strip() if out.returncode == 0 and out.stdout.strip() else "unknown"


def write_manifest(sc: Scenario, artifacts: list[Path], path: Path) -> Path:
    doc = sc.describe()
    doc["git_describe"] = git_describe()
    doc["artifacts"] = sorted(str(Path(a).relative_to(sc.output_dir)) for a in artifacts)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))
    return path


def with_output(sc: Scenario, out) -> Scenario:
    return replace(sc, output_dir=Path(out))

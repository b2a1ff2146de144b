import csv

import numpy as np
import pytest

import oracles
from spinfront.errors import ConfigurationError
from spinfront.levelset_geometry import (
    GridSpec,
    ScalarField,
    build_initial_height,
    evolve_mcf,
    extract_front,
    signed_distance,
)
from spinfront.spin_maps import MAP_I, PhysParams
from spinfront.transition_profile import ProfileParams
from spinfront.viscosity_profiles import (
    ProfileKind,
    compose_spin,
    heat_defect,
    sandwich_check,
    sub_profile,
    super_profile,
    write_violations_csv,
)

PP = ProfileParams(0.2, 0.5)
D = PP.delta
G1 = GridSpec(1, 1.0, 401)


def _dist(values, grid=G1, t=0.0):
    return ScalarField(grid, np.asarray(values, dtype=float), t)


def test_super_at_time_zero_is_eta_of_d():
    d = _dist(G1.axis())
    from spinfront.transition_profile import eta

    assert np.array_equal(super_profile(d, PP, 0.0).r.values, eta(PP, d.values))


def test_flat_branch_stays_negative():
    d = _dist(np.minimum(G1.axis(), D / 4))
    for t in (0.0, 0.25, 0.5):
        r = super_profile(d, PP, t).r.values
        assert np.allclose(r, -5 * D / 8 + D * t / 2)
        assert np.all(r <= -3 * D / 8 + 1e-15)


def test_examples_at_two_delta():
    g = GridSpec(1, 1.0, 3)
    d = _dist([-2 * D, 0.0, 2 * D], g)
    assert super_profile(d, PP, 0.0).r.values[2] == pytest.approx(D)
    sub = sub_profile(d, PP, 0.0).r.values
    assert sub[2] == pytest.approx(5 * D / 8)
    assert sub[0] == pytest.approx(-D)


@pytest.mark.parametrize("t", [0.0, 0.1, 0.4])
def test_reflection_identity(t):
    d = _dist(np.linspace(-1, 1, 401))
    lhs = sub_profile(d, PP, t).r.values
    rhs = -super_profile(_dist(-d.values), PP, t).r.values
    assert np.array_equal(lhs, rhs)


def test_monotone_drift():
    d = _dist(G1.axis())
    ts = [0.0, 0.1, 0.3, 0.5]
    sup = [super_profile(d, PP, t).r.values for t in ts]
    sub = [sub_profile(d, PP, t).r.values for t in ts]
    assert all(np.all(b >= a) for a, b in zip(sup, sup[1:]))
    assert all(np.all(b <= a) for a, b in zip(sub, sub[1:]))


@pytest.mark.parametrize("t", [-0.01, 0.51])
def test_time_range(t):
    with pytest.raises(ConfigurationError):
        super_profile(_dist(G1.axis()), PP, t)


def test_profile_kind_recorded():
    assert sub_profile(_dist(G1.axis()), PP, 0.0).kind is ProfileKind.SUB


def test_compose_spin_signs_and_norm():
    p = PhysParams(0.0, 2.0, 0.02)
    d = _dist(G1.axis())
    u = compose_spin(p, MAP_I, super_profile(d, PP, 0.0)).spins
    assert np.max(np.abs(np.linalg.norm(u, axis=-1) - 1)) <= 1e-12
    x = G1.axis()
    assert np.all(u[x <= D / 4, 1] < -0.99)
    assert np.all(u[x >= 2 * D, 1] > 0.99)


@pytest.fixture(scope="module")
def sphere_distances():
    g = GridSpec(2, 1.6, 161)
    stamps = [0.09, 0.11]
    snaps = evolve_mcf(build_initial_height(g, 1.0), stamps)
    return [signed_distance(extract_front(s), s) for s in snaps]


def test_heat_defect_bound_on_sphere(sphere_distances):
    a, b = sphere_distances
    rep = heat_defect(a, b, 0.02, PP)
    assert rep.minimum >= -6 / D - 10 * a.grid.h / D ** 2
    assert rep.ok


def test_heat_defect_flat_branch(sphere_distances):
    a, b = sphere_distances
    rep = heat_defect(a, b, 0.02, PP)
    h = a.grid.h
    flat = rep.mask & (a.values < D / 4 - 2 * h) & (b.values < D / 4 - 2 * h)
    assert np.any(flat)
    assert np.max(np.abs(rep.values[flat])) < 1e-9


def test_heat_defect_linear_branch_matches_circle_law(sphere_distances):
    a, b = sphere_distances
    rep = heat_defect(a, b, 0.02, PP)
    g = a.grid
    h = g.h
    lin = rep.mask & (a.values > D / 2 + h) & (b.values > D / 2 + h)
    R = oracles.circle_radius_law(1.0, 2, 0.1)
    with np.errstate(divide="ignore"):
        expect = -1 / R + 1 / g.radius()
    assert np.any(lin)
    assert np.all(rep.values[lin] >= -rep.tol)
    assert np.median(np.abs(rep.values[lin] - expect[lin])) < 0.1


def test_sandwich_reflexive():
    d = _dist(G1.axis())
    lo = sub_profile(d, PP, 0.1).r
    hi = super_profile(d, PP, 0.1).r
    rep = sandwich_check(lo, hi, hi, PP)
    assert rep.upper_masked == 0 and not np.any(rep.upper)
    rep = sandwich_check(lo, lo, hi, PP)
    assert not np.any(rep.lower)


def test_sandwich_bands_and_infeasibility_at_start():
    d = _dist(G1.axis())
    lo = sub_profile(d, PP, 0.0).r
    hi = super_profile(d, PP, 0.0).r
    # at d = delta the upper profile is 0 while the lower one is 5 delta / 8
    i = int(np.argmin(np.abs(G1.axis() - D)))
    assert hi.values[i] == pytest.approx(0.0, abs=1e-12)
    assert lo.values[i] == pytest.approx(5 * D / 8)
    rep = sandwich_check(lo, hi, hi, PP)
    assert rep.infeasible > 0
    band = (hi.values >= D / 4) & (hi.values <= D / 2)
    assert not np.any(rep.mask & band)


def test_sandwich_grid_mismatch():
    a = _dist(G1.axis())
    b = ScalarField(GridSpec(1, 1.0, 11), np.zeros(11))
    with pytest.raises(ConfigurationError):
        sandwich_check(a, b, a, PP)


def test_violation_csv(tmp_path):
    g = GridSpec(1, 1.0, 5)
    lo = _dist(np.zeros(5), g)
    hi = _dist(np.ones(5), g)
    r = _dist([-1.0, 0.5, 2.0, 0.5, 0.5], g)
    rep = sandwich_check(lo, r, hi, PP)
    path = write_violations_csv(rep, tmp_path / "v.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["t", "node_index", "kind", "value", "bound"]
    assert [(row[1], row[2]) for row in rows[1:]] == [("0", "lower"), ("2", "upper")]
    assert rep.violation_fraction == pytest.approx(2 / 5)

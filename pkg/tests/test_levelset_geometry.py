import csv
import math

import numpy as np
import pytest

import oracles
from spinfront.errors import (
    ConfigurationError,
    DivergenceError,
    ExtinctFrontError,
    StabilityError,
)
from spinfront.levelset_geometry import (
    GridSpec,
    ScalarField,
    analytic_sphere,
    build_initial_height,
    default_sigma,
    evolve_mcf,
    extract_front,
    front_radius,
    gradient,
    hausdorff_distance,
    max_mcf_dt,
    mcf_step,
    signed_distance,
    write_field_csv,
)


@pytest.mark.parametrize("dim,L,N", [(4, 1.0, 11), (2, 1.0, 10), (2, 1.0, 1), (2, 0.0, 11)])
def test_grid_rejected(dim, L, N):
    with pytest.raises(ConfigurationError):
        GridSpec(dim, L, N)


def test_grid_axis_contains_origin():
    g = GridSpec(2, 1.6, 201)
    ax = g.axis()
    assert ax[100] == 0.0 and ax[0] == pytest.approx(-1.6) and ax[-1] == pytest.approx(1.6)
    assert g.h == pytest.approx(0.016)
    assert g.refined().h == pytest.approx(g.h / 2)


def test_field_validation():
    g = GridSpec(1, 1.0, 5)
    with pytest.raises(ConfigurationError):
        ScalarField(g, np.zeros(4))
    with pytest.raises(ConfigurationError):
        ScalarField(g, np.array([0, 1, np.nan, 0, 0]))


def test_initial_height_examples():
    g = GridSpec(2, 2.0, 41)
    w = build_initial_height(g, 0.5)
    x, y = g.mesh()
    assert w.values[20, 20] == 0.5
    on = np.isclose(np.hypot(x, y), 0.5)
    assert np.allclose(w.values[on], 0.0, atol=1e-15)
    far = np.isclose(np.hypot(x, y), 1.0)
    assert np.allclose(w.values[far], -0.5)


@pytest.mark.parametrize("R", [0.0, 1.3, -1.0])
def test_initial_height_range(R):
    with pytest.raises(ConfigurationError):
        build_initial_height(GridSpec(2, 1.6, 21), R)


def test_constant_is_stationary():
    g = GridSpec(2, 1.0, 21)
    w = ScalarField(g, np.full(g.shape, 0.3))
    out = mcf_step(w, max_mcf_dt(g), 1e-6)
    assert np.array_equal(out.values, w.values)


def test_cfl_violation():
    g = GridSpec(2, 1.0, 21)
    w = ScalarField(g, np.zeros(g.shape))
    with pytest.raises(StabilityError):
        mcf_step(w, 1.01 * max_mcf_dt(g), 1e-6)


def test_nan_reports_step():
    g = GridSpec(1, 1.0, 21)
    w = ScalarField(g, np.linspace(-1, 1, 21) * 1e300)
    with pytest.raises(DivergenceError) as info, np.errstate(all="ignore"):
        mcf_step(w, max_mcf_dt(g), 1e-300, step_index=7, use_kernel=False)
    assert info.value.step == 7


def test_one_dimensional_profile_nearly_stationary():
    g = GridSpec(1, 1.0, 101)
    w = ScalarField(g, np.tanh(3 * g.axis()))
    out = w
    for _ in range(50):
        out = mcf_step(out, max_mcf_dt(g), default_sigma(w))
    # the mirrored wall nodes have w_x = 0, where the operator is a heat step
    assert np.max(np.abs(out.values - w.values)[2:-2]) < 1e-6


def test_kernel_matches_numpy_stencil():
    g = GridSpec(2, 1.0, 31)
    x, y = g.mesh()
    w = ScalarField(g, 0.7 - np.sqrt(x ** 2 + 0.5 * y ** 2) + 0.1 * np.sin(3 * x))
    dt = max_mcf_dt(g)
    a = mcf_step(w, dt, 1e-3, use_kernel=True)
    b = mcf_step(w, dt, 1e-3, use_kernel=False)
    assert np.max(np.abs(a.values - b.values)) < 1e-13


def test_sphere_radius_at_t02():
    g = GridSpec(2, 1.6, 201)
    (w,) = evolve_mcf(build_initial_height(g, 1.0), [0.2])
    r = front_radius(extract_front(w))
    assert abs(r - oracles.circle_radius_law(1.0, 2, 0.2)) / oracles.circle_radius_law(1.0, 2, 0.2) <= 0.02


def test_three_dimensional_sphere_shrinks_at_the_right_rate():
    g = GridSpec(3, 1.6, 41)
    (w,) = evolve_mcf(build_initial_height(g, 1.0), [0.1])
    r = front_radius(extract_front(w))
    assert r == pytest.approx(oracles.circle_radius_law(1.0, 3, 0.1), rel=0.03)


def test_relabeling_invariance():
    g = GridSpec(2, 1.6, 101)
    w = build_initial_height(g, 1.0)
    (a,) = evolve_mcf(w, [0.2])
    (b,) = evolve_mcf(w.with_values(2 * w.values), [0.2])
    assert hausdorff_distance(extract_front(a), extract_front(b)) <= 2 * g.h


def test_monotone_shrinkage():
    g = GridSpec(2, 1.6, 101)
    snaps = evolve_mcf(build_initial_height(g, 1.0), [0.05, 0.1, 0.2, 0.3])
    radii = [front_radius(extract_front(s)) for s in snaps]
    assert all(b < a for a, b in zip(radii, radii[1:]))


def test_snapshot_times_are_hit_exactly():
    g = GridSpec(2, 1.0, 21)
    snaps = evolve_mcf(build_initial_height(g, 0.5), [0.013, 0.05])
    assert [s.time for s in snaps] == [0.013, 0.05]


def test_front_of_circle():
    g = GridSpec(2, 1.6, 81)
    x, y = g.mesh()
    w = ScalarField(g, 1.0 - np.hypot(x, y))
    front = extract_front(w)
    assert np.max(np.abs(np.linalg.norm(front.points, axis=1) - 1.0)) <= g.h ** 2
    assert front.segments.shape[1:] == (2, 2)


def test_empty_front():
    g = GridSpec(2, 1.0, 11)
    assert extract_front(ScalarField(g, np.ones(g.shape))).is_empty
    with pytest.raises(ExtinctFrontError):
        front_radius(extract_front(ScalarField(g, np.ones(g.shape))))


def test_one_dimensional_crossing():
    g = GridSpec(1, 1.0, 10 + 1)
    w = ScalarField(g, g.axis() + 0.05)
    (pt,) = extract_front(w).points
    assert pt[0] == pytest.approx(-0.05, abs=1e-12)
    g = GridSpec(1, 1.0, 11)
    (pt,) = extract_front(ScalarField(g, g.axis())).points
    assert abs(pt[0]) <= 1e-12


def test_three_dimensional_crossings_on_sphere():
    g = GridSpec(3, 1.0, 21)
    w = ScalarField(g, 0.6 - g.radius())
    pts = extract_front(w).points
    assert len(pts) > 100
    assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 0.6)) <= g.h


def test_signed_distance_of_circle():
    g = GridSpec(2, 1.6, 81)
    w = build_initial_height(g, 0.8)
    d = signed_distance(extract_front(w), w)
    assert np.max(np.abs(d.values - (0.8 - g.radius()))) <= g.h
    on = np.abs(w.values) < 1e-12
    assert np.all(np.abs(d.values[on]) <= g.h)


def test_signed_distance_gradient_is_unit():
    g = GridSpec(2, 1.6, 81)
    w = build_initial_height(g, 0.8)
    d = signed_distance(extract_front(w), w)
    grad = np.sqrt(sum(x * x for x in gradient(d.values, g.h)))
    m = (np.abs(d.values) > 2 * g.h) & (g.radius() > 2 * g.h)
    m[[0, -1], :] = False
    m[:, [0, -1]] = False
    assert np.max(np.abs(grad[m] - 1.0)) <= 5 * g.h


def test_signed_distance_of_evolved_front():
    g = GridSpec(2, 1.6, 101)
    (w,) = evolve_mcf(build_initial_height(g, 1.0), [0.25])
    d = signed_distance(extract_front(w), w)
    R = oracles.circle_radius_law(1.0, 2, 0.25)
    assert np.max(np.abs(d.values - (R - g.radius()))) <= 2 * g.h


def test_signed_distance_empty_front():
    g = GridSpec(2, 1.0, 11)
    w = ScalarField(g, np.ones(g.shape))
    with pytest.raises(ExtinctFrontError):
        signed_distance(extract_front(w), w)


def test_analytic_sphere():
    assert analytic_sphere(1.0, 2, 0.25) == pytest.approx(math.sqrt(0.5))
    assert analytic_sphere(1.0, 2, 0.5) == 0.0
    assert analytic_sphere(2.0, 1, 100.0) == 2.0
    with pytest.raises(ExtinctFrontError):
        analytic_sphere(1.0, 2, 0.51)


def test_field_csv(tmp_path):
    g = GridSpec(2, 1.0, 3)
    vals = np.arange(9.0).reshape(3, 3)
    path = write_field_csv(ScalarField(g, vals), tmp_path / "f.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x1", "x2", "value"]
    assert len(rows) == 10
    assert [float(v) for v in rows[2]] == [-1.0, 0.0, 1.0]

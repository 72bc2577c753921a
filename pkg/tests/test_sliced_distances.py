import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphereot.geometry import azimuth_op, random_rotation, sph
from sphereot.harmonic_transforms import DiscreteMeasureS2
from sphereot.quadrature import GridDensity, sphere_grid
from sphereot.sliced_distances import (
    SlicedConfig,
    clip_slices,
    fine_grid,
    rotate_about_axis,
    ssw,
    vertical_slices,
    vsw,
    vsw_axis_invariance_check,
)
from oracles import random_measure

seeds = st.integers(0, 2**32 - 1)
COARSE = SlicedConfig(zenith_N=4)


def smooth_density(N=8, center=(0.3, 0.9), power=4):
    grid = sphere_grid(N)
    f = (1 + grid.nodes @ sph(*center)) ** power
    return GridDensity(grid, f / grid.integrate(f))


def test_config_validation():
    with pytest.raises(ValueError):
        SlicedConfig(p=0.5)
    with pytest.raises(ValueError):
        SlicedConfig(n_psi=0)
    assert SlicedConfig(n_psi=4).psi.tolist() == pytest.approx([np.pi / 2, np.pi, 1.5 * np.pi, 2 * np.pi])


def test_fine_grid():
    x, h = fine_grid("interval", 4)
    assert x.tolist() == [-0.75, -0.25, 0.25, 0.75] and h == 0.5
    x, h = fine_grid("circle", 4)
    assert np.allclose(x, np.pi / 4 * np.array([1, 3, 5, 7])) and h == pytest.approx(np.pi / 2)


def test_identical_measures_have_zero_distance(rng):
    mu = random_measure(rng, 3)
    assert vsw(mu, mu) == 0.0
    assert ssw(mu, mu, COARSE) == 0.0


def test_vsw1_of_antipodal_atoms():
    a = DiscreteMeasureS2([[1, 0, 0]], [1.0])
    b = DiscreteMeasureS2([[-1, 0, 0]], [1.0])
    # per slice 2|cos psi|, integral 8; the trapezoid sum on 64 angles
    cfg = SlicedConfig(p=1, n_psi=64)
    psi = cfg.psi
    assert vsw(a, b, cfg) == pytest.approx(2 * np.pi / 64 * np.sum(2 * np.abs(np.cos(psi))), abs=1e-12)
    assert vsw(a, b, SlicedConfig(p=1, n_psi=4096)) == pytest.approx(8.0, abs=1e-5)


def test_ssw_of_single_atoms_by_hand():
    a = DiscreteMeasureS2([sph(0.2, 1.0)], [1.0])
    b = DiscreteMeasureS2([sph(2.5, 2.0)], [1.0])
    cfg = SlicedConfig(zenith_N=1)
    grid = sphere_grid(1)
    alpha, beta = grid.node_angles()
    ga = azimuth_op(alpha, beta, a.points[0])
    gb = azimuth_op(alpha, beta, b.points[0])
    d = np.mod(np.abs(ga - gb), 2 * np.pi)
    d = np.minimum(d, 2 * np.pi - d)
    assert ssw(a, b, cfg) == pytest.approx(np.sqrt(np.sum(grid.weights * d**2)), abs=1e-12)


def test_metric_axioms_on_random_triples():
    rng = np.random.default_rng(2024)
    for _ in range(25):
        a, b, c = (random_measure(rng) for _ in range(3))
        for dist in (lambda x, y: vsw(x, y), lambda x, y: ssw(x, y, COARSE)):
            ab = dist(a, b)
            assert ab == dist(b, a)
            assert dist(a, c) <= ab + dist(b, c) + 1e-10


def test_mismatched_inputs_rejected(rng):
    with pytest.raises(ValueError):
        vsw(random_measure(rng), smooth_density())
    bad = DiscreteMeasureS2([[0, 0, 1]], [0.5])
    with pytest.raises(ValueError):
        vsw(bad, bad)
    f = smooth_density()
    with pytest.raises(ValueError):
        vsw(GridDensity(f.grid, 2 * f.values), f)


@given(seeds, st.integers(0, 63))
def test_vsw_axis_rotation_on_grid_is_exact(seed, multiple):
    rng = np.random.default_rng(seed)
    mu, nu = random_measure(rng, 3), random_measure(rng, 2)
    assert vsw_axis_invariance_check(mu, nu, multiple)


def test_vsw_half_step_rotation_is_only_approximate(rng):
    mu, nu = random_measure(rng, 3), random_measure(rng, 3)
    cfg = SlicedConfig(n_psi=64)
    d = vsw(mu, nu, cfg)
    rotated = vsw(rotate_about_axis(mu, np.pi / 64), rotate_about_axis(nu, np.pi / 64), cfg)
    assert abs(rotated - d) <= 0.05 * d


def test_vsw_axis_rotation_of_densities():
    f, g = smooth_density(center=(0.3, 0.9)), smooth_density(center=(2.0, 2.2))
    cfg = SlicedConfig(n_psi=18, slice_points=128)
    assert vsw_axis_invariance_check(f, g, 1, cfg, tol=1e-10)


def test_ssw_rotation_drift_is_small():
    rng = np.random.default_rng(5)
    cfg = SlicedConfig(zenith_N=8)
    for _ in range(3):
        mu, nu = random_measure(rng, 3), random_measure(rng, 3)
        Q = random_rotation(rng)
        d = ssw(mu, nu, cfg)
        assert abs(ssw(mu.rotated(Q), nu.rotated(Q), cfg) - d) <= 0.05 * d


def test_vsw_separates_symmetric_measures():
    rng = np.random.default_rng(8)
    for _ in range(50):
        a, b = random_measure(rng, 2, True), random_measure(rng, 2, True)
        assert vsw(a, b) > 1e-6


def test_vsw_cannot_see_reflection(rng):
    # V only sees the even part: a measure and its mirror image coincide
    mu = random_measure(rng, 3)
    mirror = DiscreteMeasureS2(mu.points * [1, 1, -1], mu.masses)
    assert vsw(mu, mirror) < 1e-12


def test_p_monotonicity(rng):
    mu, nu = random_measure(rng, 4), random_measure(rng, 3)
    vol = 2 * np.pi
    for dist, scale in ((vsw, vol), (lambda a, b, c: ssw(a, b, SlicedConfig(p=c.p, zenith_N=4)), 4 * np.pi)):
        d1 = dist(mu, nu, SlicedConfig(p=1)) / scale
        d2 = dist(mu, nu, SlicedConfig(p=2)) / np.sqrt(scale)
        assert d1 <= d2 + 1e-12


def test_density_slices_and_distance():
    f, g = smooth_density(center=(0.3, 0.9)), smooth_density(center=(2.0, 2.2))
    cfg = SlicedConfig(n_psi=16, slice_points=128, zenith_N=3)
    rows = vertical_slices(f, cfg.psi, cfg.slice_points)
    assert len(rows) == 16
    assert vsw(f, g, cfg) > 0.1
    assert vsw(f, f, cfg) == 0.0
    assert ssw(f, g, cfg) > 0.1


def test_density_distance_approximates_atoms():
    # a concentrated density against a point mass at its centre
    center = sph(0.4, 1.2)
    grid = sphere_grid(24)
    vals = np.exp(60 * (grid.nodes @ center - 1))
    f = GridDensity(grid, vals / grid.integrate(vals))
    g = GridDensity(grid, f.values)
    assert vsw(f, g) == 0.0
    cfg = SlicedConfig(n_psi=32, slice_points=512)
    atom_far = DiscreteMeasureS2([-center], [1.0])
    atom_near = DiscreteMeasureS2([center], [1.0])
    assert vsw(atom_near, atom_far, cfg) > 1.0


def test_clip_slices_warns(caplog):
    rows = np.array([[1.0, -0.1, 1.0], [1.0, 1.0, 1.0]])
    with caplog.at_level(logging.WARNING):
        out = clip_slices(rows, 0.5, warn=1e-3)
    assert "clipped" in caplog.text
    assert np.allclose(out.sum(axis=1) * 0.5, 1.0) and out.min() == 0.0
    with pytest.raises(ValueError, match="no positive mass"):
        clip_slices(np.array([[-1.0, 0.0]]), 1.0)

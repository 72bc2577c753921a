import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphereot.quadrature import (
    GridDensity,
    cylinder_grid,
    gauss_legendre,
    grid_from_json,
    grid_to_json,
    so3_grid,
    sphere_grid,
    weighted_dot,
)
from sphereot.special_fn import sph_harmonic, wigner_D
from oracles import harmonic_matrix


def test_gauss_legendre_examples():
    r0 = gauss_legendre(0)
    assert r0.nodes.tolist() == [0.0] and r0.weights.tolist() == [2.0]
    r1 = gauss_legendre(1)
    assert np.allclose(r1.nodes, [-1 / np.sqrt(3), 1 / np.sqrt(3)], atol=1e-15)
    assert np.allclose(r1.weights, [1, 1], atol=1e-15)
    assert gauss_legendre(2).integrate(lambda t: t**4) == pytest.approx(0.4, abs=1e-15)


@given(st.integers(0, 40))
def test_gauss_legendre_exact_on_monomials(N):
    rule = gauss_legendre(N)
    assert abs(rule.weights.sum() - 2) < 1e-12
    assert np.all(np.diff(rule.nodes) > 0)
    for d in range(2 * N + 2):
        exact = 0.0 if d % 2 else 2.0 / (d + 1)
        assert abs(rule.integrate(lambda t: t**d) - exact) < 1e-13


def test_gauss_legendre_matches_numpy():
    x, w = np.polynomial.legendre.leggauss(17)
    rule = gauss_legendre(16)
    assert np.allclose(rule.nodes, x, atol=1e-15) and np.allclose(rule.weights, w, atol=1e-15)


@pytest.mark.parametrize("N", [0, 1, 4, 9])
def test_grid_sizes_and_masses(N):
    s, c, r = sphere_grid(N), cylinder_grid(N), so3_grid(N)
    assert s.size == c.size == 2 * (N + 1) ** 2
    assert r.size == s.size * (2 * N + 1)
    assert s.weights.sum() == pytest.approx(4 * np.pi, abs=1e-10)
    assert c.weights.sum() == pytest.approx(4 * np.pi, abs=1e-10)
    assert r.weights.sum() == pytest.approx(8 * np.pi**2, abs=1e-9)


def test_so3_grid_rejects_small_gamma():
    with pytest.raises(ValueError):
        so3_grid(3, 6)


@pytest.mark.parametrize("N", [2, 6])
def test_sphere_grid_exact_to_degree_2N(N):
    grid = sphere_grid(N)
    Y = harmonic_matrix(grid, 2 * N)
    integrals = grid.weights @ Y
    expected = np.zeros(Y.shape[1], complex)
    expected[0] = np.sqrt(4 * np.pi)
    assert np.max(np.abs(integrals - expected)) < 1e-10


def test_harmonic_inner_product_example():
    grid = sphere_grid(2)
    phi, theta = grid.node_angles()
    y = sph_harmonic(2, 1, phi, theta)
    assert weighted_dot(y, y, grid.weights) == pytest.approx(1.0)


def test_so3_example_d100():
    grid = so3_grid(1, 3)
    a, b, g = grid.euler_angles()
    d = wigner_D(1, 0, 0, a, b, g)
    assert weighted_dot(d, d, grid.weights).real == pytest.approx(8 * np.pi**2 / 3, abs=1e-12)


def test_weighted_dot():
    w = sphere_grid(3).weights
    assert weighted_dot(np.ones_like(w), np.ones_like(w), w) == pytest.approx(4 * np.pi)
    with pytest.raises(ValueError):
        weighted_dot(np.ones(3), np.ones(4), np.ones(3))


def test_grid_density_checks():
    grid = sphere_grid(2)
    f = GridDensity(grid, np.full(grid.size, 1 / (4 * np.pi)))
    assert f.is_probability()
    with pytest.raises(ValueError):
        GridDensity(grid, np.ones(3))


@pytest.mark.parametrize("make", [lambda: sphere_grid(3), lambda: cylinder_grid(2), lambda: so3_grid(2, 7)])
def test_json_round_trip(make):
    grid = make()
    text = grid_to_json(grid)
    d = json.loads(text)
    assert len(d["weights"]) == grid.size and "index" in d
    back = grid_from_json(text)
    assert back.kind == grid.kind and back.N == grid.N
    assert np.array_equal(back.weights, grid.weights)

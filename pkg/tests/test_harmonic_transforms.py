import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from sphereot.geometry import azi, euler_matrix, random_rotation, sph, zen
from sphereot.harmonic_transforms import (
    DiscreteMeasureS2,
    HarmonicCoeffs,
    analyze_s2,
    evaluate_s2,
    lambda_semicircle,
    pushforward_semicircle,
    pushforward_vslice,
    semicircle_adjoint,
    semicircle_forward,
    semicircle_pinv,
    semicircle_values,
    sv_semicircle,
    sv_semicircle_table,
    sv_vertical,
    sv_vertical_table,
    synthesize_s2,
    vslice_adjoint,
    vslice_forward,
    vslice_pinv,
    vslice_values,
)
from sphereot.harmonic_transforms import _analyze_values, _semicircle_from_coeffs, _semicircle_project
from sphereot.quadrature import GridDensity, cylinder_grid, so3_grid, sphere_grid
from sphereot.special_fn import legendre_p, sph_harmonic, wigner_D
from oracles import lambda_oracle, random_field, random_real_coeffs, vertical_arc_mean


# ---------------------------------------------------------------------------
# analysis / synthesis


def test_analyze_constant_and_single_harmonic():
    grid = sphere_grid(6)
    c = analyze_s2(GridDensity(grid, np.full(grid.size, 1 / np.sqrt(4 * np.pi))))
    assert abs(c[0, 0] - 1) < 1e-12
    rest = c.c.copy()
    rest[0, 6] = 0
    assert np.max(np.abs(rest)) < 1e-10
    phi, theta = grid.node_angles()
    y = sph_harmonic(3, 2, phi, theta)
    coeffs = _analyze_values(6, y)
    assert abs(coeffs[3, 6 + 2] - 1) < 1e-12
    coeffs[3, 8] = 0
    assert np.max(np.abs(coeffs)) < 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_synthesis_analysis_round_trip(seed, N):
    rng = np.random.default_rng(seed)
    c = random_real_coeffs(rng, N)
    f = synthesize_s2(c)
    back = analyze_s2(f)
    assert np.max(np.abs(back.c - c.c)) < 1e-9
    assert back.is_real_field()


def test_evaluate_matches_synthesis(rng):
    c = random_real_coeffs(rng, 5)
    grid = sphere_grid(5)
    phi, theta = grid.node_angles()
    assert np.allclose(evaluate_s2(c, phi, theta).real, synthesize_s2(c).values, atol=1e-12)


def test_coeff_validation():
    with pytest.raises(ValueError):
        HarmonicCoeffs(2, np.zeros((2, 5)))
    with pytest.raises(ValueError):
        HarmonicCoeffs.from_dict(2, {(1, 2): 1.0})


# ---------------------------------------------------------------------------
# singular values


def test_sv_vertical_examples():
    assert sv_vertical(0, 0) == 1.0
    assert sv_vertical(2, 0) == pytest.approx(-0.5, abs=1e-15)
    with pytest.raises(ValueError):
        sv_vertical(3, 0)


@pytest.mark.parametrize("n", range(9))
def test_sv_vertical_matches_arc_integral(n):
    # V Y_n^k (psi, t) = v_n^k sqrt((2n+1)/4pi) P_n(t) e^{ik psi}
    for k in range(-n, n + 1, 2):
        Y = lambda ph, th: sph_harmonic(n, k, ph, th)
        for psi, t in [(0.3, 0.4), (2.1, -0.7), (4.0, 0.05)]:
            oracle = vertical_arc_mean(Y, psi, t)
            B = math.sqrt((2 * n + 1) / (4 * math.pi)) * legendre_p(n, t) * np.exp(1j * k * psi)
            assert abs(oracle - sv_vertical(n, k) * B) < 1e-6


def test_vertical_transform_kills_odd_parity():
    Y = lambda ph, th: sph_harmonic(3, 0, ph, th)
    assert abs(vertical_arc_mean(Y, 0.5, 0.3)) < 1e-12


def test_sv_vertical_large_n_in_log_space():
    assert np.isfinite(sv_vertical(60, 10))
    assert abs(sv_vertical(21, 1)) == pytest.approx(
        math.sqrt(math.factorial(20) / math.factorial(22)) * math.prod(range(1, 22, 2)) / math.prod(range(2, 21, 2)),
        rel=1e-12,
    )
    assert np.max(np.abs(sv_vertical_table(40))) <= 1.0


@pytest.mark.parametrize("n", range(1, 9))
def test_sv_vertical_diagonal(n):
    expected = math.prod(range(1, 2 * n, 2)) / math.sqrt(math.factorial(2 * n))
    assert abs(sv_vertical(n, n)) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n", range(11))
def test_lambda_matches_integral(n):
    for j in range(-n, n + 1):
        assert abs(lambda_semicircle(n, j) - lambda_oracle(n, j)) < 1e-10


def test_lambda_symmetry_and_zeros():
    for n in range(1, 15):
        assert lambda_semicircle(n, 0) == 0.0
        for j in range(1, n + 1):
            assert lambda_semicircle(n, -j) == pytest.approx((-1) ** j * lambda_semicircle(n, j), abs=1e-15)
            if (n + j) % 2:
                assert lambda_semicircle(n, j) == 0.0


def test_semicircle_constants():
    assert lambda_semicircle(0, 0) == 2 * (4 * math.pi) ** -1.5
    assert abs(sv_semicircle(0) - (2 * math.pi) ** -0.5) < 1e-12


def test_semicircle_singular_values_bracket():
    w = sv_semicircle_table(64)
    scaled = w * np.sqrt(np.arange(65) + 1)
    assert np.all(w > 0)
    assert scaled.min() >= 0.1 and scaled.max() <= 1.0


# ---------------------------------------------------------------------------
# vertical slice transform


def test_vslice_uniform_and_y20():
    N = 6
    grid = sphere_grid(N)
    g = vslice_forward(GridDensity(grid, np.full(grid.size, 1 / (4 * np.pi))))
    assert np.allclose(g.values, 1 / (4 * np.pi), atol=1e-14)
    f = synthesize_s2(HarmonicCoeffs.from_dict(N, {(2, 0): 1.0}))
    g = vslice_forward(f).values.reshape(N + 1, 2 * N + 2)
    t = cylinder_grid(N).t
    expected = -0.5 * math.sqrt(5 / (4 * math.pi)) * legendre_p(2, t)
    assert np.allclose(g, expected[:, None], atol=1e-13)


@given(st.integers(0, 2**32 - 1), st.integers(1, 10))
def test_vslice_adjoint_pairing(seed, N):
    rng = np.random.default_rng(seed)
    f = random_field(rng, N)
    g = GridDensity(cylinder_grid(N), rng.standard_normal(cylinder_grid(N).size))
    lhs = np.sum(g.grid.weights * vslice_forward(f).values * g.values)
    rhs = np.sum(f.grid.weights * f.values * vslice_adjoint(g).values)
    scale = math.sqrt(np.sum(f.grid.weights * f.values**2) * np.sum(g.grid.weights * g.values**2))
    assert abs(lhs - rhs) <= 1e-10 * scale


def test_vslice_adjoint_examples():
    N = 4
    cyl = cylinder_grid(N)
    assert np.allclose(vslice_adjoint(GridDensity(cyl, np.ones(cyl.size))).values, 1.0, atol=1e-13)
    t, psi = np.meshgrid(cyl.t, cyl.psi, indexing="ij")
    B22 = math.sqrt(5 / (4 * math.pi)) * legendre_p(2, t.ravel()) * np.cos(2 * psi.ravel())
    out = vslice_adjoint(GridDensity(cyl, B22))
    c = analyze_s2(out)
    # cos(2 psi) = (e^{2i psi} + e^{-2i psi}) / 2
    assert abs(c[2, 2] - 0.5 * sv_vertical(2, 2)) < 1e-12
    assert abs(c[2, -2] - 0.5 * sv_vertical(2, -2)) < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_vslice_round_trip_even(seed):
    f = random_field(np.random.default_rng(seed), 16, even=True)
    assert np.max(np.abs(vslice_pinv(vslice_forward(f)).values - f.values)) <= 1e-8


def test_vslice_pinv_projects_to_even_part():
    N = 5
    f = synthesize_s2(HarmonicCoeffs.from_dict(N, {(1, 0): 1.0}))
    assert np.max(np.abs(vslice_forward(f).values)) < 1e-13
    assert np.max(np.abs(vslice_pinv(vslice_forward(f)).values)) < 1e-13


def test_vslice_values_agree_with_grid(rng):
    N = 5
    c = random_real_coeffs(rng, N)
    f = synthesize_s2(c)
    cyl = cylinder_grid(N)
    rows = vslice_values(c, cyl.psi, cyl.t)
    assert np.allclose(rows.T.ravel(), vslice_forward(f).values, atol=1e-12)


# ---------------------------------------------------------------------------
# semicircle transform


def semicircle_oracle(f, Q):
    val = quad(lambda th: f(Q @ sph(0.0, th)) * math.sin(th), 0, math.pi, epsabs=1e-13, limit=200)[0]
    return val / (4 * math.pi)


def test_semicircle_uniform():
    N = 4
    grid = sphere_grid(N)
    g = semicircle_forward(GridDensity(grid, np.full(grid.size, 1 / (4 * np.pi))))
    assert np.allclose(g.values, 1 / (8 * np.pi**2), atol=1e-15)
    assert g.mass() == pytest.approx(1.0, abs=1e-12)


def test_semicircle_matches_meridian_integral(rng):
    # real field 2 Re Y_2^1
    c = HarmonicCoeffs.from_dict(2, {(2, 1): 1.0, (2, -1): -1.0})
    f = lambda xi: 2 * sph_harmonic(2, 1, azi(xi), zen(xi)).real
    for _ in range(20):
        a, b, g = rng.uniform(0, 2 * np.pi), rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        oracle = semicircle_oracle(f, euler_matrix(a, b, g))
        assert abs(semicircle_values(c, a, b, g) - oracle) < 1e-8


@pytest.mark.parametrize("n, k", [(0, 0), (1, 1), (2, -2), (3, 1), (5, 4)])
def test_semicircle_norm_of_harmonic(n, k):
    N = 6
    f = synthesize_s2(HarmonicCoeffs.from_dict(N, {(n, k): 1.0}), complex_ok=True)
    c = np.zeros((N + 1, 2 * N + 1), complex)
    c[n, N + k] = 1.0
    g = _semicircle_from_coeffs(N, 2 * N + 1, c)
    norm2 = np.sum(so3_grid(N).weights * np.abs(g) ** 2)
    assert abs(norm2 - sv_semicircle(n) ** 2) < 1e-8
    assert f.shape == (sphere_grid(N).size,)


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_semicircle_adjoint_pairing(seed, N):
    rng = np.random.default_rng(seed)
    f = random_field(rng, N)
    grid = so3_grid(N)
    g = GridDensity(grid, rng.standard_normal(grid.size))
    lhs = np.sum(grid.weights * semicircle_forward(f).values * g.values)
    rhs = np.sum(f.grid.weights * f.values * semicircle_adjoint(g).values)
    scale = math.sqrt(np.sum(f.grid.weights * f.values**2) * np.sum(grid.weights * g.values**2))
    assert abs(lhs - rhs) <= 1e-10 * scale


def test_semicircle_adjoint_examples():
    N = 3
    grid = so3_grid(N)
    out = semicircle_adjoint(GridDensity(grid, np.ones(grid.size)))
    # only (n, j, k) = (0, 0, 0) survives: lambda_0^0 * 8pi^2 * Y_0^0
    assert np.allclose(out.values, lambda_semicircle(0, 0) * 8 * np.pi**2 / np.sqrt(4 * np.pi), atol=1e-13)
    a, b, g = grid.euler_angles()
    d = np.conj(wigner_D(1, 1, 1, a, b, g))
    c = _semicircle_project(N, grid.G, d)
    assert abs(c[1, N + 1] - lambda_semicircle(1, 1) * 8 * np.pi**2 / 3) < 1e-12


@given(st.integers(0, 2**32 - 1))
def test_semicircle_round_trip(seed):
    f = random_field(np.random.default_rng(seed), 16)
    assert np.max(np.abs(semicircle_pinv(semicircle_forward(f)).values - f.values)) <= 1e-8


def test_semicircle_recovers_single_harmonic():
    N = 5
    c = HarmonicCoeffs.from_dict(N, {(3, -2): 1.0, (3, 2): 1.0})
    f = synthesize_s2(c)
    back = analyze_s2(semicircle_pinv(semicircle_forward(f)))
    assert np.max(np.abs(back.c - c.c)) < 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_mass_conservation(seed, N):
    f = random_field(np.random.default_rng(seed), N)
    assert abs(vslice_forward(f).mass() - f.mass()) < 1e-9 * max(1, abs(f.mass()))
    assert abs(semicircle_forward(f).mass() - f.mass()) < 1e-9 * max(1, abs(f.mass()))


def test_forward_of_nonnegative_density_is_nearly_nonnegative():
    N = 12
    grid = sphere_grid(N)
    # (1 + xi_3)^4 / norm is a nonnegative polynomial of degree 4 <= N
    f = (1 + grid.nodes[:, 2]) ** 4
    f = GridDensity(grid, f / grid.integrate(f))
    for g in (vslice_forward(f).values, semicircle_forward(f).values):
        assert g.min() >= -1e-6 * g.max()


# ---------------------------------------------------------------------------
# push-forwards


def test_pushforward_vslice_examples():
    mu = DiscreteMeasureS2([[1, 0, 0]], [1.0])
    assert pushforward_vslice(mu, 0.0).positions.tolist() == [1.0]
    pole = DiscreteMeasureS2([[0, 0, 1]], [1.0])
    assert pushforward_vslice(pole, 1.7).positions.tolist() == [0.0]
    eq = DiscreteMeasureS2(sph(np.pi / 2 * np.arange(4), np.pi / 2), np.full(4, 0.25))
    pf = pushforward_vslice(eq, 0.3)
    expected = np.sort(np.cos(0.3 - np.pi / 2 * np.arange(4)))
    assert np.allclose(pf.positions, expected, atol=1e-15)
    assert pf.masses.sum() == 1.0


def test_pushforward_semicircle_examples(rng):
    mu = DiscreteMeasureS2([sph(1.2, 0.7)], [1.0])
    assert pushforward_semicircle(mu, 0.0, 0.0).positions[0] == pytest.approx(1.2)
    at_zenith = DiscreteMeasureS2([sph(0.4, 1.0)], [1.0])
    assert pushforward_semicircle(at_zenith, 0.4, 1.0).positions[0] == 0.0
    # rotating the measure and the zenith together shifts the azimuths by gamma
    pts = np.array([sph(a, b) for a, b in rng.uniform([0, 0.2], [6, 2.9], (5, 2))])
    mu = DiscreteMeasureS2(pts, np.full(5, 0.2))
    a, b, g = 0.8, 1.3, 0.5
    base = pushforward_semicircle(mu, a, b).positions
    Q = euler_matrix(a, b, g)
    alpha2, beta2 = azi(Q @ [0, 0, 1.0]), zen(Q @ [0, 0, 1.0])
    assert np.allclose(np.sort(np.mod(base - g, 2 * np.pi)), np.sort(
        [azi(Q.T @ p) for p in pts]), atol=1e-9)
    assert np.isclose(alpha2, a) and np.isclose(beta2, b)


def test_discrete_measure_validation():
    with pytest.raises(ValueError):
        DiscreteMeasureS2([[1, 0, 0]], [-1.0])
    mu = DiscreteMeasureS2([[0, 0, 2.0]], [1.0])
    assert np.allclose(mu.points, [[0, 0, 1]])
    Q = random_rotation(np.random.default_rng(0))
    assert np.allclose(mu.rotated(Q).points[0], Q[:, 2])

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sphereot.geometry import (
    EulerAngles,
    azi,
    azimuth_op,
    euler_matrix,
    is_rotation,
    random_rotation,
    random_unit_vectors,
    rot3,
    slice_op,
    sph,
    zen,
    zenith_op,
)

angles = st.floats(0.0, 2 * np.pi, exclude_max=True)
polar = st.floats(1e-6, np.pi - 1e-6)


def test_sph_examples():
    assert np.allclose(sph(0, 0), [0, 0, 1])
    assert np.allclose(sph(np.pi / 2, np.pi / 2), [0, 1, 0], atol=1e-16)
    assert np.allclose(sph(0.7, 1.1), [np.cos(0.7) * np.sin(1.1), np.sin(0.7) * np.sin(1.1), np.cos(1.1)])


def test_pole_conventions():
    assert azi([0, 0, 1]) == 0.0 and zen([0, 0, 1]) == 0.0
    assert azi([0, 0, -1]) == 0.0 and zen([0, 0, -1]) == pytest.approx(np.pi)
    assert azi(sph(2.0, 1.0)) == pytest.approx(2.0) and zen(sph(2.0, 1.0)) == pytest.approx(1.0)


@given(angles, polar)
def test_sph_round_trip(phi, theta):
    xi = sph(phi, theta)
    assert abs(np.linalg.norm(xi) - 1) < 1e-12
    assert zen(xi) == pytest.approx(theta, abs=1e-12)
    d = abs(azi(xi) - phi)
    assert min(d, 2 * np.pi - d) < 1e-9


def test_euler_examples():
    assert np.allclose(euler_matrix(0, 0, 0), np.eye(3))
    assert np.allclose(euler_matrix(0.4, 0, 1.3), rot3(1.7))
    # Q(alpha, beta, 0) sph(0, theta) lies on the meridian through sph(alpha, beta)
    a, b, th = 0.9, 0.6, 1.4
    p = euler_matrix(a, b, 0) @ sph(0, th)
    assert np.allclose(p, sph(a, b + th)) or np.allclose(p, sph(a + np.pi, 2 * np.pi - b - th))


@given(angles, st.floats(0, np.pi), angles)
def test_euler_is_rotation_and_factorizes(a, b, g):
    Q = euler_matrix(a, b, g)
    assert is_rotation(Q)
    assert np.max(np.abs(Q - euler_matrix(a, b, 0) @ rot3(g))) < 1e-13


def test_euler_angles_validate():
    with pytest.raises(ValueError):
        EulerAngles(0.0, 4.0, 0.0)
    e = EulerAngles(-0.5, 1.0, 7.0)
    assert 0 <= e.alpha < 2 * np.pi and 0 <= e.gamma < 2 * np.pi


def test_slice_op_examples():
    assert slice_op(0.0, [1, 0, 0]) == 1.0
    assert slice_op(1.234, [0, 0, 1]) == 0.0
    assert slice_op(np.pi / 3, [1, 0, 0]) == pytest.approx(0.5)


@given(angles, angles, angles, polar)
def test_slice_op_rotation_identity(psi, alpha, phi, theta):
    xi = sph(phi, theta)
    assert slice_op(psi + alpha, xi) == pytest.approx(slice_op(psi, rot3(alpha).T @ xi), abs=1e-12)


def test_azimuth_op_examples():
    assert azimuth_op(0.0, 0.0, sph(1.3, 0.8)) == pytest.approx(1.3)
    assert azimuth_op(0.7, 1.1, sph(0.7, 1.1)) == 0.0
    assert zenith_op(0.7, 1.1, sph(0.7, 1.1)) == pytest.approx(0.0, abs=1e-7)
    assert zenith_op(0.7, 1.1, -sph(0.7, 1.1)) == pytest.approx(np.pi, abs=1e-7)
    assert zenith_op(0.0, 0.0, sph(2.0, 0.3)) == pytest.approx(0.3)


@given(angles, polar, angles, polar)
def test_azimuth_zenith_round_trip(alpha, beta, phi, theta):
    xi = sph(phi, theta)
    g, z = azimuth_op(alpha, beta, xi), zenith_op(alpha, beta, xi)
    assert np.allclose(euler_matrix(alpha, beta, 0) @ sph(g, z), xi, atol=1e-12)


@given(angles, polar, angles, angles, st.floats(0.01, np.pi - 0.01))
def test_azimuth_shift_by_gamma(alpha, beta, gamma, phi, theta):
    xi = sph(phi, theta)
    if zenith_op(alpha, beta, xi) < 1e-6 or zenith_op(alpha, beta, xi) > np.pi - 1e-6:
        return
    lhs = azimuth_op(alpha, beta, xi) - gamma
    rhs = azi(euler_matrix(alpha, beta, gamma).T @ xi)
    d = np.mod(lhs - rhs, 2 * np.pi)
    assert min(d, 2 * np.pi - d) < 1e-9


def test_random_helpers(rng):
    x = random_unit_vectors(rng, 10)
    assert x.shape == (10, 3) and np.allclose(np.linalg.norm(x, axis=1), 1)
    assert is_rotation(random_rotation(rng))

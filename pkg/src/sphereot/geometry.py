"""Coordinates on the sphere and the rotation group.

Points are plain float arrays with a trailing axis of length 3; all functions
broadcast over leading axes.  Angles are radians; azimuths are returned in
[0, 2pi) and the poles get azimuth 0.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EulerAngles",
    "unit",
    "sph",
    "azi",
    "zen",
    "rot3",
    "rot2",
    "euler_matrix",
    "is_rotation",
    "slice_op",
    "azimuth_op",
    "zenith_op",
    "random_rotation",
    "random_unit_vectors",
]

TWO_PI = 2.0 * np.pi
_POLE_TOL = 1e-14


@dataclass(frozen=True)
class EulerAngles:
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.beta <= np.pi:
            raise ValueError(f"beta={self.beta} outside [0, pi]")
        object.__setattr__(self, "alpha", float(np.mod(self.alpha, TWO_PI)))
        object.__setattr__(self, "gamma", float(np.mod(self.gamma, TWO_PI)))

    def matrix(self):
        return euler_matrix(self.alpha, self.beta, self.gamma)


def unit(x):
    """Renormalize vectors onto the sphere."""
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise ValueError("zero vector has no direction")
    return x / norm


def sph(phi, theta):
    """Spherical coordinates: (cos phi sin theta, sin phi sin theta, cos theta)."""
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    st = np.sin(theta)
    return np.stack(np.broadcast_arrays(np.cos(phi) * st, np.sin(phi) * st, np.cos(theta)), axis=-1)


def azi(xi):
    """Azimuth in [0, 2pi); 0 at the poles."""
    xi = np.asarray(xi, dtype=float)
    rho = np.hypot(xi[..., 0], xi[..., 1])
    phi = np.mod(np.arctan2(xi[..., 1], xi[..., 0]), TWO_PI)
    phi = np.where(rho <= _POLE_TOL, 0.0, phi)
    # arctan2 of a tiny negative y gives 2pi - eps which mod maps to 2pi
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    return phi if phi.ndim else float(phi)


def zen(xi):
    """Zenith angle in [0, pi]."""
    xi = np.asarray(xi, dtype=float)
    rho = np.hypot(xi[..., 0], xi[..., 1])
    theta = np.arctan2(rho, xi[..., 2])
    return theta if theta.ndim else float(theta)


def rot3(alpha):
    """Rotation about the third axis; shape ``alpha.shape + (3, 3)``."""
    alpha = np.asarray(alpha, dtype=float)
    c, s = np.cos(alpha), np.sin(alpha)
    z, o = np.zeros_like(alpha), np.ones_like(alpha)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def rot2(beta):
    """Rotation about the second axis; shape ``beta.shape + (3, 3)``."""
    beta = np.asarray(beta, dtype=float)
    c, s = np.cos(beta), np.sin(beta)
    z, o = np.zeros_like(beta), np.ones_like(beta)
    return np.stack([np.stack([c, z, s], -1), np.stack([z, o, z], -1), np.stack([-s, z, c], -1)], -2)


def euler_matrix(alpha, beta, gamma):
    """Q(alpha, beta, gamma) = R3(alpha) R2(beta) R3(gamma)."""
    return rot3(alpha) @ rot2(beta) @ rot3(gamma)


def is_rotation(Q, tol=1e-12):
    Q = np.asarray(Q, dtype=float)
    eye = np.eye(3)
    orth = np.max(np.abs(np.swapaxes(Q, -1, -2) @ Q - eye)) <= tol
    return bool(orth and np.all(np.abs(np.linalg.det(Q) - 1.0) <= tol))


def slice_op(psi, xi):
    """Signed distance of ``xi`` along the horizontal direction (cos psi, sin psi, 0)."""
    xi = np.asarray(xi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    t = np.cos(psi) * xi[..., 0] + np.sin(psi) * xi[..., 1]
    t = np.clip(t, -1.0, 1.0)
    return t if t.ndim else float(t)


def _rotate_back(alpha, beta, xi):
    # Q(alpha, beta, 0)^T xi, broadcasting zeniths against points
    Q = euler_matrix(alpha, beta, 0.0)
    xi = np.asarray(xi, dtype=float)
    return np.einsum("...ji,...j->...i", Q, xi)


def azimuth_op(alpha, beta, xi):
    """Azimuth of ``xi`` seen from the zenith sph(alpha, beta)."""
    return azi(_rotate_back(alpha, beta, xi))


def zenith_op(alpha, beta, xi):
    """Angular distance of ``xi`` from the zenith sph(alpha, beta)."""
    return zen(_rotate_back(alpha, beta, xi))


def random_unit_vectors(rng, size):
    x = rng.standard_normal((size, 3)) if np.ndim(size) == 0 else rng.standard_normal(tuple(size) + (3,))
    return unit(x)


def random_rotation(rng):
    """Haar-distributed rotation via QR of a Gaussian matrix."""
    A = rng.standard_normal((3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q

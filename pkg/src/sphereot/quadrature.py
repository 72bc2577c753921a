"""Quadrature grids on S^2, T x I and SO(3).

Index conventions (used by every sample vector and file in the package):

* sphere and cylinder grids: ``m = j * (2N + 2) + i`` where ``i`` runs over
  the equispaced angle (phi or psi) and ``j`` over the Gauss-Legendre nodes,
  i.e. sample vectors reshape to ``(N + 1, 2N + 2)`` in C order;
* SO(3) grid: ``l = m * G + g`` where ``m`` is the sphere index of the zenith
  ``sph(alpha, beta)`` and ``g`` the index of ``gamma_g = 2 pi g / G``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import sph, TWO_PI

__all__ = [
    "GaussLegendreRule",
    "SphereGrid",
    "CylinderGrid",
    "SO3Grid",
    "GridDensity",
    "gauss_legendre",
    "sphere_grid",
    "cylinder_grid",
    "so3_grid",
    "weighted_dot",
    "grid_to_json",
    "grid_from_json",
]


@dataclass(frozen=True)
class GaussLegendreRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        return float(np.sum(self.weights * f(self.nodes)))


def _legendre_and_derivative(n, t):
    p_prev, p = np.ones_like(t), t.copy()
    for m in range(1, n):
        p_prev, p = p, ((2 * m + 1) * t * p - m * p_prev) / (m + 1)
    dp = n * (t * p - p_prev) / (t * t - 1.0)
    return p, dp


def gauss_legendre(N):
    """Gauss-Legendre rule with ``N + 1`` nodes (exact up to degree ``2N + 1``).

    Nodes are the roots of P_{N+1}, found by Newton's method from Chebyshev
    initial guesses; weights are ``2 / ((1 - t^2) P'_{N+1}(t)^2)``.
    """
    if N < 0:
        raise ValueError("band-limit N must be nonnegative")
    n = N + 1
    if n == 1:
        return GaussLegendreRule(np.array([0.0]), np.array([2.0]))
    k = np.arange(1, n + 1)
    t = -np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = _legendre_and_derivative(n, t)
        step = p / dp
        t = t - step
        if np.max(np.abs(step)) < 1e-16:
            break
    _, dp = _legendre_and_derivative(n, t)
    w = 2.0 / ((1.0 - t * t) * dp * dp)
    # symmetrize to remove the last bits of round-off
    t = 0.5 * (t - t[::-1])
    w = 0.5 * (w + w[::-1])
    return GaussLegendreRule(t, w)


def _equispaced_angles(N):
    i = np.arange(1, 2 * N + 3)
    return np.mod(i * np.pi / (N + 1), TWO_PI)


@dataclass(frozen=True)
class SphereGrid:
    """Product Gauss grid on S^2, exact for spherical harmonics of degree <= 2N."""

    N: int
    phi: np.ndarray
    t: np.ndarray
    r: np.ndarray
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    kind = "sphere"

    @property
    def size(self):
        return self.weights.size

    @property
    def shape2d(self):
        return (self.t.size, self.phi.size)

    @property
    def theta(self):
        return np.arccos(self.t)

    def node_angles(self):
        """Per-node (phi, theta) arrays in sample-vector order."""
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        return ph.ravel(), th.ravel()

    def integrate(self, values):
        return float(np.sum(self.weights * np.asarray(values)))


@dataclass(frozen=True)
class CylinderGrid:
    """Grid on T x I: equispaced psi times Gauss-Legendre t."""

    N: int
    psi: np.ndarray
    t: np.ndarray
    r: np.ndarray
    weights: np.ndarray = field(repr=False)

    kind = "cylinder"

    @property
    def size(self):
        return self.weights.size

    @property
    def shape2d(self):
        return (self.t.size, self.psi.size)

    def integrate(self, values):
        return float(np.sum(self.weights * np.asarray(values)))


@dataclass(frozen=True)
class SO3Grid:
    """Product of a sphere grid in the zenith (alpha, beta) and G equispaced gammas."""

    N: int
    G: int
    sphere: SphereGrid = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    kind = "so3"

    @property
    def size(self):
        return self.weights.size

    @property
    def shape2d(self):
        return (self.sphere.size, self.G)

    def euler_angles(self):
        """Per-node (alpha, beta, gamma) arrays in sample-vector order."""
        alpha, beta = self.sphere.node_angles()
        return (np.repeat(alpha, self.G), np.repeat(beta, self.G), np.tile(self.gamma, self.sphere.size))

    def integrate(self, values):
        return float(np.sum(self.weights * np.asarray(values)))


def sphere_grid(N):
    if N < 0:
        raise ValueError("band-limit N must be nonnegative")
    gl = gauss_legendre(N)
    phi = _equispaced_angles(N)
    theta = np.arccos(gl.nodes)
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    nodes = sph(ph.ravel(), th.ravel())
    weights = np.repeat(TWO_PI * gl.weights / (2 * N + 2), 2 * N + 2)
    return SphereGrid(N, phi, gl.nodes, gl.weights, nodes, weights)


def cylinder_grid(N):
    if N < 0:
        raise ValueError("band-limit N must be nonnegative")
    gl = gauss_legendre(N)
    psi = _equispaced_angles(N)
    weights = np.repeat(np.pi * gl.weights / (N + 1), 2 * N + 2)
    return CylinderGrid(N, psi, gl.nodes, gl.weights, weights)


def so3_grid(N, G=None):
    """SO(3) product grid; ``G`` defaults to ``2N + 1``, the smallest exact choice."""
    G = 2 * N + 1 if G is None else int(G)
    if G < 2 * N + 1:
        raise ValueError(f"G={G} < 2N+1={2 * N + 1}: Wigner D products would not be integrated exactly")
    sphere = sphere_grid(N)
    gamma = TWO_PI * np.arange(G) / G
    weights = np.repeat(sphere.weights, G) * (TWO_PI / G)
    return SO3Grid(N, G, sphere, gamma, weights)


def weighted_dot(a, b, w):
    """sum_m w_m a_m conj(b_m)."""
    a, b, w = np.asarray(a), np.asarray(b), np.asarray(w)
    if a.shape != b.shape or a.shape != w.shape:
        raise ValueError(f"length mismatch: {a.shape}, {b.shape}, {w.shape}")
    val = np.sum(w * a * np.conj(b))
    return complex(val) if np.iscomplexobj(val) else float(val)


@dataclass(frozen=True)
class GridDensity:
    """Real samples bound to a grid, read as a density w.r.t. the weighted counting measure."""

    grid: object
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} samples for {self.grid.kind} grid N={self.grid.N}, got {values.shape}")
        object.__setattr__(self, "values", values)

    def mass(self):
        return self.grid.integrate(self.values)

    def is_probability(self, tol=1e-8):
        return bool(np.all(self.values >= 0) and abs(self.mass() - 1.0) <= tol)


def grid_to_json(grid):
    """Descriptor with band-limit, nodes, weights and the index convention."""
    d = {"kind": grid.kind, "N": grid.N, "weights": grid.weights.tolist()}
    if grid.kind == "sphere":
        phi, theta = grid.node_angles()
        d.update(index="m = j*(2N+2) + i", phi=phi.tolist(), theta=theta.tolist())
    elif grid.kind == "cylinder":
        t, psi = np.meshgrid(grid.t, grid.psi, indexing="ij")
        d.update(index="l = j*(2N+2) + i", psi=psi.ravel().tolist(), t=t.ravel().tolist())
    else:
        a, b, g = grid.euler_angles()
        d.update(G=grid.G, index="l = m*G + g", alpha=a.tolist(), beta=b.tolist(), gamma=g.tolist())
    return json.dumps(d)


def grid_from_json(text):
    d = json.loads(text)
    kind = d["kind"]
    if kind == "sphere":
        return sphere_grid(d["N"])
    if kind == "cylinder":
        return cylinder_grid(d["N"])
    if kind == "so3":
        return so3_grid(d["N"], d["G"])
    raise ValueError(f"unknown grid kind {kind!r}")


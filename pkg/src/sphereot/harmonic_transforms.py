"""Spherical harmonic analysis and the vertical slice / semicircle transforms.

Both transforms are diagonal in suitable bases, so every discrete operator is
a short chain of tensor contractions:

* vertical slice transform:  ``Y_n^k  ->  v_n^k B_n^k`` with
  ``B_n^k(psi, t) = sqrt((2n+1)/(4pi)) P_n(t) e^{ik psi}`` on ``T x I``;
* normalized semicircle transform:
  ``Y_n^k  ->  sum_j lambda_n^j conj(D_n^{k,j})`` on SO(3).

Harmonic coefficients are stored in a dense ``(N + 1, 2N + 1)`` complex array
indexed ``[n, k + N]`` (entries with ``|k| > n`` are zero).  The tables of
Legendre and Wigner functions at the grid nodes are cached per band-limit.
"""

import functools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, azimuth_op, slice_op, unit
from .ot1d import CIRCLE, INTERVAL, Measure1D
from .quadrature import GridDensity, cylinder_grid, so3_grid, sphere_grid
from .special_fn import (
    legendre_p,
    log_double_factorial,
    double_factorial,
    sph_legendre_table,
    wigner_d_table,
)

__all__ = [
    "HarmonicCoeffs",
    "DiscreteMeasureS2",
    "analyze_s2",
    "synthesize_s2",
    "evaluate_s2",
    "sv_vertical",
    "sv_vertical_table",
    "lambda_semicircle",
    "lambda_table",
    "sv_semicircle",
    "sv_semicircle_table",
    "vslice_forward",
    "vslice_adjoint",
    "vslice_pinv",
    "vslice_values",
    "semicircle_forward",
    "semicircle_adjoint",
    "semicircle_pinv",
    "semicircle_values",
    "semicircle_slices",
    "pushforward_vslice",
    "pushforward_semicircle",
]

_EXACT_LIMIT = 20


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True)
class HarmonicCoeffs:
    """Coefficients ``c[n, k + N]`` of a band-limited function on S^2."""

    N: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.shape != (self.N + 1, 2 * self.N + 1):
            raise ValueError(f"coefficient array must have shape {(self.N + 1, 2 * self.N + 1)}, got {c.shape}")
        object.__setattr__(self, "c", c)

    def __getitem__(self, nk):
        n, k = nk
        if abs(k) > n or n > self.N:
            raise ValueError(f"order {k} exceeds degree {n} or band-limit {self.N}")
        return self.c[n, k + self.N]

    def conjugation_defect(self):
        """``max |c_n^{-k} - (-1)^k conj(c_n^k)|``; zero for real fields."""
        k = np.arange(-self.N, self.N + 1)
        mirrored = ((-1.0) ** np.abs(k)) * np.conj(self.c[:, ::-1])
        return float(np.max(np.abs(self.c - mirrored)))

    def is_real_field(self, tol=1e-10):
        return self.conjugation_defect() <= tol * max(1.0, float(np.max(np.abs(self.c))))

    @classmethod
    def from_dict(cls, N, entries):
        """Build from ``{(n, k): value}``."""
        c = np.zeros((N + 1, 2 * N + 1), dtype=complex)
        for (n, k), val in entries.items():
            if abs(k) > n or n > N:
                raise ValueError(f"invalid index (n={n}, k={k}) for band-limit {N}")
            c[n, k + N] = val
        return cls(N, c)


@dataclass(frozen=True)
class DiscreteMeasureS2:
    """Finitely many weighted atoms on S^2."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = unit(np.atleast_2d(np.asarray(self.points, dtype=float)))
        m = np.asarray(self.masses, dtype=float).ravel()
        if pts.shape != (m.size, 3):
            raise ValueError(f"points must have shape ({m.size}, 3), got {pts.shape}")
        if np.any(m < 0):
            raise ValueError("masses must be nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", m)

    def is_probability(self, tol=1e-12):
        return abs(float(np.sum(self.masses)) - 1.0) <= tol

    def rotated(self, Q):
        return DiscreteMeasureS2(self.points @ np.asarray(Q).T, self.masses)


# ---------------------------------------------------------------------------
# cached tables


def _frozen(a):
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=16)
def _sphere_tables(N):
    grid = sphere_grid(N)
    P = _frozen(sph_legendre_table(N, grid.t))  # (N+1, 2N+1, N+1)
    k = np.arange(-N, N + 1)
    E = _frozen(np.exp(1j * np.outer(grid.phi, k)))  # (2N+2, 2N+1)
    return grid, P, E


@functools.lru_cache(maxsize=16)
def _cylinder_tables(N):
    grid = cylinder_grid(N)
    n = np.arange(N + 1)
    L = np.stack([legendre_p(m, grid.t) for m in n])
    L = _frozen(L * np.sqrt((2 * n + 1) / (4 * np.pi))[:, None])  # (N+1, N+1)
    k = np.arange(-N, N + 1)
    E = _frozen(np.exp(1j * np.outer(grid.psi, k)))
    return grid, L, E


@functools.lru_cache(maxsize=8)
def _so3_tables(N, G):
    grid = so3_grid(N, G)
    d = _frozen(wigner_d_table(N, grid.sphere.t))  # (N+1, 2N+1, 2N+1, N+1)
    k = np.arange(-N, N + 1)
    Ea = _frozen(np.exp(1j * np.outer(grid.sphere.phi, k)))  # alpha
    Eg = _frozen(np.exp(1j * np.outer(grid.gamma, k)))  # gamma
    return grid, d, Ea, Eg


# ---------------------------------------------------------------------------
# analysis / synthesis on S^2


def _check_grid(f, kind):
    if not isinstance(f, GridDensity):
        raise TypeError("expected a GridDensity")
    if f.grid.kind != kind:
        raise ValueError(f"expected samples on a {kind} grid, got {f.grid.kind}")
    return f.grid


def _analyze_values(N, values):
    grid, P, E = _sphere_tables(N)
    F = values.reshape(grid.shape2d)  # (t_j, phi_i)
    F1 = (F @ np.conj(E)) * (TWO_PI / (2 * N + 2))  # (t_j, k)
    return np.einsum("j,nkj,jk->nk", grid.r, P, F1)


def _synthesize_values(N, c):
    _, P, E = _sphere_tables(N)
    H = np.einsum("nk,nkj->jk", c, P)
    return (H @ E.T).ravel()


def analyze_s2(f):
    """Coefficients ``<f, Y_n^k>_w`` by direct quadrature summation."""
    grid = _check_grid(f, "sphere")
    return HarmonicCoeffs(grid.N, _analyze_values(grid.N, f.values))


def synthesize_s2(c, grid=None, complex_ok=False):
    """Samples of ``sum c_n^k Y_n^k`` on a sphere grid of the same band-limit.

    The imaginary part is dropped (real fields) unless ``complex_ok``; then
    the complex sample vector is returned instead of a GridDensity.
    """
    grid = sphere_grid(c.N) if grid is None else grid
    if grid.N != c.N:
        raise ValueError(f"band-limit mismatch: coefficients N={c.N}, grid N={grid.N}")
    vals = _synthesize_values(c.N, c.c)
    return vals if complex_ok else GridDensity(grid, vals.real)


def evaluate_s2(c, phi, theta):
    """Evaluate ``sum c_n^k Y_n^k`` at arbitrary points ``sph(phi, theta)``."""
    phi, theta = np.broadcast_arrays(np.asarray(phi, float), np.asarray(theta, float))
    P = sph_legendre_table(c.N, np.cos(theta.ravel()))
    k = np.arange(-c.N, c.N + 1)
    vals = np.einsum("nk,nkp,pk->p", c.c, P, np.exp(1j * np.outer(phi.ravel(), k)))
    return vals.reshape(phi.shape)


# ---------------------------------------------------------------------------
# singular values


def _check_nk(n, k):
    if n < 0 or abs(k) > n:
        raise ValueError(f"order {k} exceeds degree {n}")


def sv_vertical(n, k):
    """Singular value ``v_n^k`` of the vertical slice transform (n + k even)."""
    _check_nk(n, k)
    if (n + k) % 2:
        raise ValueError(f"v_n^k is only defined for n + k even, got n={n}, k={k}")
    sign = -1.0 if ((n + k) // 2) % 2 else 1.0
    if n <= _EXACT_LIMIT:
        ratio = math.factorial(n - k) / math.factorial(n + k)
        return sign * math.sqrt(ratio) * double_factorial(n + k - 1) / double_factorial(n - k)
    log_val = 0.5 * (math.lgamma(n - k + 1) - math.lgamma(n + k + 1))
    log_val += log_double_factorial(n + k - 1) - log_double_factorial(n - k)
    return sign * math.exp(log_val)


@functools.lru_cache(maxsize=32)
def sv_vertical_table(N):
    """``v[n, k + N]`` with zeros where ``n + k`` is odd or ``|k| > n``."""
    v = np.zeros((N + 1, 2 * N + 1))
    for n in range(N + 1):
        for k in range(-n, n + 1, 2):
            v[n, k + N] = sv_vertical(n, k)
    return _frozen(v)


def lambda_semicircle(n, j):
    """Coefficient ``lambda_n^j`` of the semicircle transform.

    ``lambda_0^0 = 2 (4pi)^{-3/2}``; for ``n >= 1`` nonzero only when
    ``j != 0`` and ``n + j`` is even, with ``lambda_n^{-j} = (-1)^j lambda_n^j``.
    """
    _check_nk(n, j)
    if n == 0:
        return 2.0 * (4.0 * math.pi) ** -1.5
    if j == 0 or (n + j) % 2:
        return 0.0
    if j < 0:
        return (-1.0) ** j * lambda_semicircle(n, -j)
    log_val = 0.5 * (math.log((2 * n + 1) / (4 * math.pi)) + math.lgamma(n - j + 1) - math.lgamma(n + j + 1))
    log_val += math.log(j) + log_double_factorial(n - 2) + log_double_factorial(n + j - 1)
    log_val -= log_double_factorial(n - j) + log_double_factorial(n + 1)
    factor = 2.0 if n % 2 == 0 else math.pi
    return (-1.0) ** j / (4 * math.pi) * factor * math.exp(log_val)


@functools.lru_cache(maxsize=32)
def lambda_table(N):
    """``lam[n, j + N]``."""
    lam = np.zeros((N + 1, 2 * N + 1))
    for n in range(N + 1):
        for j in range(-n, n + 1):
            lam[n, j + N] = lambda_semicircle(n, j)
    return _frozen(lam)


def sv_semicircle(n):
    """``w_n = (sum_j |lambda_n^j|^2 8pi^2 / (2n+1))^{1/2}``."""
    if n < 0:
        raise ValueError(f"degree n={n} must be nonnegative")
    lam = np.array([lambda_semicircle(n, j) for j in range(-n, n + 1)])
    return float(np.sqrt(np.sum(lam * lam) * 8 * math.pi**2 / (2 * n + 1)))


@functools.lru_cache(maxsize=32)
def sv_semicircle_table(N):
    return _frozen(np.array([sv_semicircle(n) for n in range(N + 1)]))


# ---------------------------------------------------------------------------
# vertical slice transform


def _vslice_from_coeffs(N, c):
    _, L, E = _cylinder_tables(N)
    H = np.einsum("nk,nj->jk", sv_vertical_table(N) * c, L)
    return (H @ E.T).ravel()


def _vslice_project(N, values):
    """``<g, B_n^k>_w~`` for all (n, k)."""
    grid, L, E = _cylinder_tables(N)
    G = values.reshape(grid.shape2d)
    G1 = (G @ np.conj(E)) * (TWO_PI / (2 * N + 2))
    return np.einsum("j,nj,jk->nk", grid.r, L, G1)


def vslice_forward(f):
    """Discrete vertical slice transform: sphere grid -> cylinder grid."""
    grid = _check_grid(f, "sphere")
    N = grid.N
    vals = _vslice_from_coeffs(N, _analyze_values(N, f.values))
    return GridDensity(cylinder_grid(N), vals.real)


def vslice_adjoint(g):
    """Adjoint ``sum v_n^k <g, B_n^k> Y_n^k`` (cylinder grid -> sphere grid)."""
    grid = _check_grid(g, "cylinder")
    N = grid.N
    c = sv_vertical_table(N) * _vslice_project(N, g.values)
    return GridDensity(sphere_grid(N), _synthesize_values(N, c).real)


def vslice_pinv(g):
    """Truncated pseudoinverse ``sum (1/v_n^k) <g, B_n^k> Y_n^k``."""
    grid = _check_grid(g, "cylinder")
    N = grid.N
    v = sv_vertical_table(N)
    inv = np.divide(1.0, v, out=np.zeros_like(v), where=v != 0)
    c = inv * _vslice_project(N, g.values)
    return GridDensity(sphere_grid(N), _synthesize_values(N, c).real)


def vslice_values(c, psi, t):
    """``(V f)(psi_i, t_j)`` for coefficients ``c`` on arbitrary grids.

    Returns an array of shape ``(len(psi), len(t))``; rows are slices.
    """
    N = c.N
    psi = np.atleast_1d(np.asarray(psi, float))
    t = np.atleast_1d(np.asarray(t, float))
    n = np.arange(N + 1)
    L = np.stack([legendre_p(m, t) for m in n]) * np.sqrt((2 * n + 1) / (4 * np.pi))[:, None]
    H = np.einsum("nk,nj->kj", sv_vertical_table(N) * c.c, L)
    E = np.exp(1j * np.outer(psi, np.arange(-N, N + 1)))
    return (E @ H).real


# ---------------------------------------------------------------------------
# semicircle transform


def _semicircle_from_coeffs(N, G, c):
    grid, d, Ea, Eg = _so3_tables(N, G)
    A = np.einsum("nj,nk,nkjb->bkj", lambda_table(N), c, d)  # (beta, k, j)
    B = np.einsum("bkj,ik->bij", A, Ea)  # (beta, alpha, j)
    out = np.einsum("bij,gj->big", B, Eg)  # (beta, alpha, gamma)
    return out.reshape(-1)


def _semicircle_project(N, G, values):
    """``sum_j lambda_n^j <g, conj(D_n^{k,j})>_w~`` for all (n, k)."""
    grid, d, Ea, Eg = _so3_tables(N, G)
    nb, na = grid.sphere.shape2d
    g = values.reshape(nb, na, G)
    G1 = np.einsum("big,gj->bij", g, np.conj(Eg)) * (TWO_PI / G)
    G2 = np.einsum("bij,ik->bkj", G1, np.conj(Ea)) * (TWO_PI / (2 * N + 2))
    return np.einsum("nj,b,nkjb,bkj->nk", lambda_table(N), grid.sphere.r, d, G2)


def semicircle_forward(f, G=None):
    """Discrete normalized semicircle transform: sphere grid -> SO(3) grid."""
    grid = _check_grid(f, "sphere")
    N = grid.N
    G = 2 * N + 1 if G is None else G
    vals = _semicircle_from_coeffs(N, G, _analyze_values(N, f.values))
    return GridDensity(so3_grid(N, G), vals.real)


def semicircle_adjoint(g):
    grid = _check_grid(g, "so3")
    N = grid.N
    c = _semicircle_project(N, grid.G, g.values)
    return GridDensity(sphere_grid(N), _synthesize_values(N, c).real)


def semicircle_pinv(g):
    """Truncated pseudoinverse: the adjoint followed by division by ``w_n^2``."""
    grid = _check_grid(g, "so3")
    N = grid.N
    w2 = sv_semicircle_table(N) ** 2
    c = _semicircle_project(N, grid.G, g.values) / w2[:, None]
    return GridDensity(sphere_grid(N), _synthesize_values(N, c).real)


def semicircle_values(c, alpha, beta, gamma):
    """``(W f)(alpha, beta, gamma)`` at arbitrary Euler angles (broadcast)."""
    N = c.N
    alpha, beta, gamma = np.broadcast_arrays(*(np.asarray(x, float) for x in (alpha, beta, gamma)))
    shape = alpha.shape
    a, b, g = alpha.ravel(), beta.ravel(), gamma.ravel()
    d = wigner_d_table(N, np.cos(b))  # (n, k, j, P)
    k = np.arange(-N, N + 1)
    A = np.einsum("nj,nk,nkjp->pkj", lambda_table(N), c.c, d)
    val = np.einsum("pkj,pk,pj->p", A, np.exp(1j * np.outer(a, k)), np.exp(1j * np.outer(g, k)))
    return val.real.reshape(shape)


def semicircle_slices(c, zenith_grid, gamma):
    """Slices ``gamma -> (W f)(alpha_m, beta_m, gamma)`` for every node of a
    sphere grid of zeniths; shape ``(zenith_grid.size, len(gamma))``.

    The product structure of the zenith grid is used, so the Wigner table is
    only evaluated at its ``N' + 1`` distinct polar angles.
    """
    N = c.N
    gamma = np.atleast_1d(np.asarray(gamma, float))
    k = np.arange(-N, N + 1)
    d = wigner_d_table(N, zenith_grid.t)
    A = np.einsum("nj,nk,nkjb->bkj", lambda_table(N), c.c, d)
    B = np.einsum("bkj,ik->bij", A, np.exp(1j * np.outer(zenith_grid.phi, k)))
    out = np.einsum("bij,gj->big", B, np.exp(1j * np.outer(gamma, k)))
    return out.real.reshape(zenith_grid.size, gamma.size)


# ---------------------------------------------------------------------------
# push-forwards of discrete measures


def pushforward_vslice(mu, psi):
    """Atoms ``(S_psi(xi_i), m_i)`` on [-1, 1]."""
    t = slice_op(psi, mu.points)
    return Measure1D.from_atoms(np.atleast_1d(t), mu.masses, INTERVAL, normalize=True)


def pushforward_semicircle(mu, alpha, beta):
    """Atoms ``(A_{alpha,beta}(xi_i), m_i)`` on the circle."""
    g = azimuth_op(alpha, beta, mu.points)
    return Measure1D.from_atoms(np.atleast_1d(g), mu.masses, CIRCLE, normalize=True)

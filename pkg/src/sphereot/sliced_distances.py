"""Vertical and semicircular sliced Wasserstein distances on S^2.

Both distances average one-dimensional Wasserstein distances over a family
of slices:

* ``VSW_p(mu, nu)^p = int_T W_p^p(V_psi mu, V_psi nu) dpsi`` with interval
  slices ``t = <xi, (cos psi, sin psi, 0)>``;
* ``SSW_p(mu, nu)^p = int_{S^2} W_p^p(W_{alpha,beta} mu, W_{alpha,beta} nu)``
  with circular slices given by the azimuth around a zenith.

Inputs are either :class:`DiscreteMeasureS2` (exact push-forwards) or
probability densities sampled on a sphere grid; for the latter the slices
are the band-limited transforms evaluated on a fine 1-D grid.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, rot3, slice_op, azimuth_op
from .harmonic_transforms import (
    DiscreteMeasureS2,
    HarmonicCoeffs,
    analyze_s2,
    semicircle_slices,
    synthesize_s2,
    vslice_values,
)
from .ot1d import CIRCLE, INTERVAL, Measure1D, wasserstein_circle_batch, wasserstein_interval_batch
from .quadrature import GridDensity, sphere_grid

__all__ = [
    "SlicedConfig",
    "vsw",
    "ssw",
    "vsw_axis_invariance_check",
    "vertical_slices",
    "semicircle_slice_measures",
    "clip_slices",
    "clip_fraction",
    "fine_grid",
    "rotate_about_axis",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlicedConfig:
    """Discretization of the slice integrals.

    Attributes
    ----------
    p : float
        Wasserstein exponent, ``p >= 1``.
    n_psi : int
        Number of equispaced slice directions ``psi_i = 2 pi i / n_psi``.
    zenith_N : int
        Band-limit of the Gauss sphere grid carrying the SSW zeniths.
    slice_points : int
        Cells of the fine 1-D grid used to sample density slices.
    clip_warn : float
        Clipped negative mass per slice above which a warning is logged.
    """

    p: float = 2.0
    n_psi: int = 64
    zenith_N: int = 16
    slice_points: int = 256
    clip_warn: float = 1e-8

    def __post_init__(self):
        if not (1.0 <= self.p < np.inf):
            raise ValueError(f"p={self.p} must be finite and >= 1")
        if self.n_psi < 1 or self.slice_points < 2 or self.zenith_N < 0:
            raise ValueError("slice counts must be positive")

    @property
    def psi(self):
        return TWO_PI * np.arange(1, self.n_psi + 1) / self.n_psi

    def zenith_grid(self):
        return sphere_grid(self.zenith_N)


def clip_fraction(rows, cell):
    """Clip negative samples and renormalize each row.

    Returns the clipped rows and the largest negative mass relative to the
    positive mass of its row.
    """
    rows = np.asarray(rows, dtype=float)
    neg = np.sum(np.clip(-rows, 0.0, None), axis=1) * cell
    pos = np.clip(rows, 0.0, None)
    mass = np.sum(pos, axis=1) * cell
    if np.any(mass <= 0):
        raise ValueError("a slice has no positive mass")
    return pos / mass[:, None], float(np.max(neg / mass))


def clip_slices(rows, cell, warn=1e-8, label="slice"):
    """Clip negative samples of density rows and renormalize each row.

    ``cell`` is the cell length of the sampling grid.  Rows with clipped
    negative mass above ``warn`` (relative to the row mass) trigger a log
    warning.
    """
    try:
        out, worst = clip_fraction(rows, cell)
    except ValueError:
        raise ValueError(f"a {label} has no positive mass") from None
    if worst > warn:
        log.warning("%s densities clipped: up to %.2e of the mass was negative", label, worst)
    return out


def fine_grid(flavor, K):
    """Cell centres and cell length of ``K`` equal cells of [-1, 1] or [0, 2pi)."""
    if flavor == INTERVAL:
        edges = np.linspace(-1.0, 1.0, K + 1)
        return 0.5 * (edges[1:] + edges[:-1]), 2.0 / K
    return TWO_PI * (np.arange(K) + 0.5) / K, TWO_PI / K


def vertical_slices(mu, psi, slice_points=256, clip_warn=1e-8):
    """Interval measures ``V_psi mu`` for all directions ``psi``."""
    psi = np.atleast_1d(np.asarray(psi, float))
    if isinstance(mu, DiscreteMeasureS2):
        t = slice_op(psi[:, None], mu.points[None, :, :])
        return [Measure1D.from_atoms(row, mu.masses, INTERVAL, normalize=True) for row in t]
    c = _coeffs(mu)
    nodes, cell = fine_grid(INTERVAL, slice_points)
    # V_psi mu as a density on I is 2pi times the transform on T x I
    rows = clip_slices(TWO_PI * vslice_values(c, psi, nodes), cell, clip_warn, "vertical slice")
    return [Measure1D.from_density(nodes, row, np.full(nodes.size, cell), INTERVAL) for row in rows]


def semicircle_slice_measures(mu, zenith_grid, slice_points=256, clip_warn=1e-8):
    """Circle measures ``W_{alpha,beta} mu`` for all nodes of ``zenith_grid``."""
    if isinstance(mu, DiscreteMeasureS2):
        alpha, beta = zenith_grid.node_angles()
        g = azimuth_op(alpha[:, None], beta[:, None], mu.points[None, :, :])
        return [Measure1D.from_atoms(row, mu.masses, CIRCLE, normalize=True) for row in g]
    c = _coeffs(mu)
    nodes, cell = fine_grid(CIRCLE, slice_points)
    # W_{alpha,beta} mu as a density on T is 4pi times the transform on SO(3)
    rows = clip_slices(4 * np.pi * semicircle_slices(c, zenith_grid, nodes), cell, clip_warn, "semicircle slice")
    return [Measure1D.from_density(nodes, row, np.full(nodes.size, cell), CIRCLE) for row in rows]


def _coeffs(mu):
    if isinstance(mu, HarmonicCoeffs):
        return mu
    if isinstance(mu, GridDensity):
        if mu.grid.kind != "sphere":
            raise ValueError("densities must be sampled on a sphere grid")
        if abs(mu.mass() - 1.0) > 1e-6 or np.any(mu.values < 0):
            raise ValueError("sliced distances need probability densities")
        return analyze_s2(mu)
    raise TypeError(f"unsupported measure type {type(mu).__name__}")


def _check_pair(mu, nu):
    if type(mu) is not type(nu):
        raise ValueError(f"mismatched representations: {type(mu).__name__} vs {type(nu).__name__}")
    if isinstance(mu, DiscreteMeasureS2):
        for m in (mu, nu):
            if not m.is_probability(1e-9):
                raise ValueError("atomic inputs must be probability measures")


def vsw(mu, nu, cfg=SlicedConfig()):
    """Vertical sliced Wasserstein distance.

    The integral over the slice direction uses the trapezoid rule on
    ``cfg.n_psi`` equispaced angles.
    """
    _check_pair(mu, nu)
    psi = cfg.psi
    wp = wasserstein_interval_batch(
        vertical_slices(mu, psi, cfg.slice_points, cfg.clip_warn),
        vertical_slices(nu, psi, cfg.slice_points, cfg.clip_warn),
        cfg.p,
        power=True,
    )
    total = TWO_PI / cfg.n_psi * math.fsum(wp)
    return max(total, 0.0) ** (1.0 / cfg.p)


def ssw(mu, nu, cfg=SlicedConfig()):
    """Semicircular sliced Wasserstein distance over the zenith sphere grid."""
    _check_pair(mu, nu)
    grid = cfg.zenith_grid()
    wp = wasserstein_circle_batch(
        semicircle_slice_measures(mu, grid, cfg.slice_points, cfg.clip_warn),
        semicircle_slice_measures(nu, grid, cfg.slice_points, cfg.clip_warn),
        cfg.p,
        power=True,
    )
    total = math.fsum(grid.weights * wp)
    return max(total, 0.0) ** (1.0 / cfg.p)


def rotate_about_axis(mu, alpha):
    """Apply ``R_3(alpha)`` to an atomic measure or a band-limited density."""
    if isinstance(mu, DiscreteMeasureS2):
        return mu.rotated(rot3(alpha))
    if isinstance(mu, GridDensity):
        c = analyze_s2(mu)
        N = c.N
        k = np.arange(-N, N + 1)
        return synthesize_s2(HarmonicCoeffs(N, c.c * np.exp(-1j * k * alpha)), mu.grid)
    raise TypeError(f"unsupported measure type {type(mu).__name__}")


def vsw_axis_invariance_check(mu, nu, alpha_grid_multiple, cfg=SlicedConfig(), tol=1e-12):
    """Compare VSW before and after rotating both measures by a multiple of
    the slice spacing about the vertical axis."""
    alpha = TWO_PI * alpha_grid_multiple / cfg.n_psi
    before = vsw(mu, nu, cfg)
    after = vsw(rotate_about_axis(mu, alpha), rotate_about_axis(nu, alpha), cfg)
    return abs(before - after) <= tol

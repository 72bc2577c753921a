"""KL-regularized inversion of the discrete spherical transforms.

Solves

    min_{f in Delta_w}  KL_w~(T f, g) + rho KL_w(f, 1)

by a primal-dual splitting with a projection onto the weighted probability
simplex for the primal step and closed-form Lambert-W proximal maps for the
two dual variables (one for ``T f = y_1`` and one for ``f = y_2``).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .harmonic_transforms import (
    semicircle_adjoint,
    semicircle_forward,
    vslice_adjoint,
    vslice_forward,
)
from .quadrature import GridDensity, sphere_grid
from .special_fn import lambert_w_exp

__all__ = [
    "PdParams",
    "PdResult",
    "TransformOperator",
    "project_simplex",
    "kl_divergence",
    "prox_kl_conjugate",
    "operator_norm",
    "pd_invert",
    "objective_value",
    "primal_dual",
]

log = logging.getLogger(__name__)


def project_simplex(f, w):
    """Projection onto ``{f >= 0, <f, 1>_w = 1}`` in the ``w``-weighted norm.

    The result is ``[f + lam]_+`` where ``lam`` solves the piecewise-linear
    equation ``<[f + lam]_+, 1>_w = 1``; sorting the breakpoints ``-f_m``
    isolates the active piece, on which the equation is solved exactly.
    """
    f = np.asarray(f, dtype=float)
    w = np.asarray(w, dtype=float)
    if f.shape != w.shape:
        raise ValueError(f"length mismatch: {f.shape} vs {w.shape}")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    order = np.argsort(-f, kind="stable")
    fs, ws = f[order], w[order]
    cw = np.cumsum(ws)
    cwf = np.cumsum(ws * fs)
    lam = (1.0 - cwf) / cw
    # the active set is the largest prefix whose smallest entry stays positive
    k = np.nonzero(fs + lam > 0)[0][-1]
    return np.maximum(f + lam[k], 0.0)


def kl_divergence(f, g, w):
    """``<f, log f - log g>_w + <g - f, 1>_w`` with ``0 log 0 = 0``.

    Returns ``inf`` if some ``f_m > 0`` meets ``g_m = 0`` or an entry is negative.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(f < 0) or np.any(g < 0):
        return np.inf
    if np.any((f > 0) & (g == 0)):
        return np.inf
    pos = f > 0
    term = np.zeros_like(f)
    term[pos] = f[pos] * (np.log(f[pos]) - np.log(g[pos]))
    return float(np.sum(w * (term + g - f)))


def prox_kl_conjugate(x, sigma, a, b):
    """Proximal map of ``sigma (a KL)^*(., b)``: ``x - a W((sigma/a) b exp(x/a))``.

    The Lambert-W argument is handled in the log domain so that large ``x``
    cannot overflow; components with ``b = 0`` are returned unchanged.
    """
    if sigma <= 0 or a <= 0:
        raise ValueError("sigma and a must be positive")
    x = np.asarray(x, dtype=float)
    b = np.broadcast_to(np.asarray(b, dtype=float), x.shape)
    if np.any(b < 0):
        raise ValueError("b must be nonnegative")
    out = x.copy()
    live = b > 0
    u = np.log(sigma / a * b[live]) + x[live] / a
    out[live] = x[live] - a * lambert_w_exp(u)
    return out


@dataclass(frozen=True)
class TransformOperator:
    """A discrete transform with its adjoint and the weights of both spaces."""

    kind: str
    N: int
    G: int = None

    def __post_init__(self):
        if self.kind not in ("v", "w"):
            raise ValueError(f"transform must be 'v' or 'w', got {self.kind!r}")

    @classmethod
    def for_codomain(cls, grid):
        if grid.kind == "cylinder":
            return cls("v", grid.N)
        if grid.kind == "so3":
            return cls("w", grid.N, grid.G)
        raise ValueError(f"no transform maps into a {grid.kind} grid")

    @property
    def domain(self):
        return sphere_grid(self.N)

    @property
    def codomain(self):
        return self.forward(np.zeros(self.domain.size)).grid

    def forward(self, f):
        f = GridDensity(self.domain, f)
        return vslice_forward(f) if self.kind == "v" else semicircle_forward(f, self.G)

    def adjoint(self, g):
        return vslice_adjoint(g) if self.kind == "v" else semicircle_adjoint(g)


def operator_norm(forward, adjoint, weights, iters=50, seed=0):
    """Power-iteration estimate of the operator norm between weighted spaces.

    ``forward`` and ``adjoint`` act on plain sample vectors; ``weights`` are
    the weights of the domain.
    """
    w = np.asarray(weights, dtype=float)
    x = np.random.default_rng(seed).standard_normal(w.size)
    x /= np.sqrt(np.sum(w * x * x))
    est = 0.0
    for _ in range(iters):
        y = adjoint(forward(x))
        est = float(np.sqrt(max(np.sum(w * x * y), 0.0)))
        norm = np.sqrt(np.sum(w * y * y))
        if norm == 0:
            return 0.0
        x = y / norm
    return est


@dataclass(frozen=True)
class PdParams:
    """Parameters of the primal-dual iteration.

    ``tau=None`` selects ``0.9 / (sigma (1 + ||T||^2))`` from a power-iteration
    estimate of the operator norm.
    """

    rho: float = 0.1
    sigma: float = 1.0
    tau: float = 0.25
    theta: float = 1.0
    max_iter: int = 200
    tol: float = 0.0

    def __post_init__(self):
        if self.rho <= 0 or self.sigma <= 0 or (self.tau is not None and self.tau <= 0):
            raise ValueError("rho, sigma and tau must be positive")
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta={self.theta} must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass
class PdResult:
    density: GridDensity
    objective: np.ndarray
    iterations: int
    tau: float
    op_norm: float = field(default=np.nan)


def objective_value(Tf, g, f, rho, w_cod, w_dom, floor=1e-12):
    """Regularized objective with both KL arguments floored at ``floor``.

    Band-limited forward images ``T f`` dip slightly below zero and the data
    may contain exact zeros, which would make the plain objective infinite;
    the floor keeps the trace finite and comparable across iterations.
    """
    data = kl_divergence(np.maximum(Tf, floor), np.maximum(g, floor), w_cod)
    return data + rho * kl_divergence(f, np.ones_like(f), w_dom)


def pd_invert(g, params=PdParams(), transform=None, safety=1.05):
    """Regularized inversion of ``T f = g`` over the weighted simplex.

    Parameters
    ----------
    g : GridDensity
        Nonnegative data on a cylinder grid (vertical slice transform) or an
        SO(3) grid (semicircle transform).
    params : PdParams
    transform : {"v", "w"}, optional
        Checked against the grid of ``g`` when given.

    Returns
    -------
    PdResult
        The last primal iterate (exactly in the simplex), the objective trace
        and the step size actually used.
    """
    op = TransformOperator.for_codomain(g.grid)
    if transform is not None and transform != op.kind:
        raise ValueError(f"transform {transform!r} does not match data on a {g.grid.kind} grid")
    w = op.domain.weights
    wt = g.grid.weights
    data = np.asarray(g.values, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValueError("data contains non-finite values")
    if np.any(data < 0):
        log.warning("data has negative entries (min %.3e); clipped to 0", data.min())
        data = np.clip(data, 0.0, None)
    mass = float(np.sum(wt * data))
    if mass <= 0:
        raise ValueError("data has no positive mass")
    if abs(mass - 1.0) > 1e-6:
        log.warning("data mass %.8f renormalized to 1", mass)
        data = data / mass

    fwd = lambda x: op.forward(x).values
    adj = lambda y: op.adjoint(GridDensity(g.grid, y)).values
    res = primal_dual(fwd, adj, data, w, wt, params, safety)
    res.density = GridDensity(op.domain, res.density)
    return res


def primal_dual(forward, adjoint, g, w, wt, params=PdParams(), safety=1.05):
    """Primal-dual iteration for ``min_{f in Delta_w} KL_wt(T f, g) + rho KL_w(f, 1)``.

    ``forward``/``adjoint`` map plain vectors between the ``w``- and
    ``wt``-weighted spaces.  Returns a :class:`PdResult` whose ``density``
    is the final primal vector.
    """
    w = np.asarray(w, dtype=float)
    wt = np.asarray(wt, dtype=float)
    data = np.asarray(g, dtype=float)
    norm = operator_norm(forward, adjoint, w)
    bound = 1.0 + (safety * norm) ** 2
    sigma = params.sigma
    tau = params.tau if params.tau is not None else 0.9 / (sigma * bound)
    if 1.0 / (tau * sigma) <= bound:
        raise ValueError(
            f"step sizes violate 1/(tau sigma) > 1 + ||T||^2: tau={tau}, sigma={sigma}, ||T||~{norm:.4f}"
        )

    rho, theta = params.rho, params.theta
    f = np.full(w.size, 1.0 / (4.0 * np.pi))
    y1 = np.zeros(wt.size)
    y2 = np.zeros(w.size)
    trace = []
    it = 0
    for it in range(1, params.max_iter + 1):
        f_new = project_simplex(f - tau * adjoint(y1) - tau * y2, w)
        f_bar = f_new + theta * (f_new - f)
        y1 = prox_kl_conjugate(y1 + sigma * forward(f_bar), sigma, 1.0, data)
        y2 = prox_kl_conjugate(y2 + sigma * f_bar, sigma, rho, 1.0)
        if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
            raise FloatingPointError(f"non-finite dual iterate at iteration {it}")
        change = float(np.sqrt(np.sum(w * (f_new - f) ** 2)))
        f = f_new
        trace.append(objective_value(forward(f), data, f, rho, wt, w))
        if params.tol > 0 and change <= params.tol:
            break
    return PdResult(f, np.array(trace), it, tau, norm)

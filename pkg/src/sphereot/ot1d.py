"""One-dimensional optimal transport on the interval [-1, 1] and the circle.

Every measure is stored through its cumulative distribution function as a
list of breakpoints ``(x_k, F_k)``, both nondecreasing, with linear
interpolation in between.  Atoms appear as two breakpoints sharing the same
``x`` (a vertical jump); grid densities are piecewise-uniform cells, so their
CDF is piecewise linear.  Quantile functions are then piecewise linear in the
level ``r`` as well, and Wasserstein distances reduce to exact integrals of
``|a + b s|^p`` over the pieces of the merged level partition.

On the circle the CDF covers one period ``[0, 2pi]`` with ``F(0-) = 0`` and
``F(2pi-) = 1``; it is continued by ``F(x + 2pi) = F(x) + 1``.

All heavy routines accept a batch axis so that many slices are processed in
one vectorized call (see ``*_batch`` functions).
"""

from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI

__all__ = [
    "INTERVAL",
    "CIRCLE",
    "Cdf1D",
    "Measure1D",
    "CdtFunction",
    "cdf",
    "quantile",
    "wasserstein_interval",
    "wasserstein_circle",
    "optimal_shift",
    "wasserstein_interval_batch",
    "wasserstein_circle_batch",
    "cdt",
    "icdt",
    "ccdt",
    "iccdt",
    "interpolate_interval",
    "interpolate_circle",
    "cdt_batch",
    "ccdt_batch",
    "cdt_l2_distance",
    "uniform_reference",
    "cdt_uniform_rows",
    "ccdt_uniform_rows",
    "measure_to_csv",
    "measure_from_csv",
]

INTERVAL = "interval"
CIRCLE = "circle"
_DOMAIN = {INTERVAL: (-1.0, 1.0), CIRCLE: (0.0, TWO_PI)}
_MASS_TOL = 1e-12
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _check_flavor(flavor):
    if flavor not in _DOMAIN:
        raise ValueError(f"flavor must be 'interval' or 'circle', got {flavor!r}")


# ---------------------------------------------------------------------------
# batched primitives


def _searchsorted_rows(a, v, side="left"):
    """Row-wise ``np.searchsorted`` for 2-D ``a`` (sorted rows) and ``v``."""
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    B, K = a.shape
    Q = v.shape[1]
    if side == "left":
        cat = np.concatenate([v, a], axis=1)
        is_a = np.concatenate([np.zeros((B, Q), bool), np.ones((B, K), bool)], axis=1)
        offset = 0
    else:
        cat = np.concatenate([a, v], axis=1)
        is_a = np.concatenate([np.ones((B, K), bool), np.zeros((B, Q), bool)], axis=1)
        offset = K
    order = np.argsort(cat, axis=1, kind="stable")
    sorted_is_a = np.take_along_axis(is_a, order, axis=1)
    counts = np.cumsum(sorted_is_a, axis=1)
    rows, cols = np.nonzero(~sorted_is_a)
    out = np.empty((B, Q), dtype=np.intp)
    out[rows, order[rows, cols] - offset] = counts[rows, cols]
    return out


def _quantile_rows(xs, Fs, r):
    """Generalized inverse ``min{x : F(x) >= r}`` of piecewise-linear CDF rows.

    ``xs``, ``Fs`` have shape (B, K); ``r`` has shape (B, Q) and may exceed
    ``[F_0, F_{K-1}]``, in which case the end positions are returned.
    """
    K = xs.shape[1]
    idx = _searchsorted_rows(Fs, r, side="left")
    hi = np.clip(idx, 1, K - 1)
    lo = hi - 1
    x0 = np.take_along_axis(xs, lo, 1)
    x1 = np.take_along_axis(xs, hi, 1)
    f0 = np.take_along_axis(Fs, lo, 1)
    f1 = np.take_along_axis(Fs, hi, 1)
    df = f1 - f0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(df > 0, (r - f0) / df, 1.0)
    q = x0 + np.clip(s, 0.0, 1.0) * (x1 - x0)
    q = np.where(idx == 0, xs[:, :1], q)
    q = np.where(idx >= K, xs[:, -1:], q)
    return q


def _cdf_rows(xs, Fs, x):
    """Right-continuous evaluation of CDF rows at positions ``x`` (B, Q)."""
    K = xs.shape[1]
    idx = _searchsorted_rows(xs, x, side="right")
    hi = np.clip(idx, 1, K - 1)
    lo = hi - 1
    x0 = np.take_along_axis(xs, lo, 1)
    x1 = np.take_along_axis(xs, hi, 1)
    f0 = np.take_along_axis(Fs, lo, 1)
    f1 = np.take_along_axis(Fs, hi, 1)
    dx = x1 - x0
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(dx > 0, (x - x0) / dx, 1.0)
    val = f0 + np.clip(s, 0.0, 1.0) * (f1 - f0)
    val = np.where(idx == 0, Fs[:, :1] * 0.0, val)
    val = np.where(idx >= K, Fs[:, -1:], val)
    return val


def _int_abs_pow_linear(u0, u1, p):
    """Exact integral over s in [0, 1] of ``|u0 + (u1 - u0) s|^p``."""
    du = u1 - u0
    small = np.abs(du) <= 1e-14 * np.maximum(np.abs(u0) + np.abs(u1), 1e-300)

    def anti(u):
        return np.sign(u) * np.abs(u) ** (p + 1) / (p + 1)

    with np.errstate(divide="ignore", invalid="ignore"):
        val = (anti(u1) - anti(u0)) / du
    mid = np.abs(0.5 * (u0 + u1)) ** p
    return np.where(small, mid, val)


def _lp_pow_quantile_gap(knots, qa, qb, p):
    """``int_0^1 |qa(r) - qb(r)|^p dr`` for piecewise-linear quantile maps.

    ``knots`` (B, R) is a sorted partition of [0, 1] containing all
    breakpoints of both maps; ``qa``/``qb`` are callables taking levels (B, Q).
    On each piece the gap is linear, so it is probed at the two interior
    quarter points and extrapolated to the ends; this avoids evaluating the
    quantile exactly on a jump.
    """
    r0, r1 = knots[:, :-1], knots[:, 1:]
    dr = r1 - r0
    m1 = r0 + 0.25 * dr
    m2 = r0 + 0.75 * dr
    probes = np.concatenate([m1, m2], axis=1)
    gap = qa(probes) - qb(probes)
    n = r0.shape[1]
    g1, g2 = gap[:, :n], gap[:, n:]
    u0 = 1.5 * g1 - 0.5 * g2
    u1 = 1.5 * g2 - 0.5 * g1
    return np.sum(dr * _int_abs_pow_linear(u0, u1, p), axis=1)


def _pad_rows(rows):
    """Stack ragged breakpoint arrays by repeating the last breakpoint."""
    K = max(r.size for r in rows)
    out = np.empty((len(rows), K))
    for b, r in enumerate(rows):
        out[b, : r.size] = r
        out[b, r.size :] = r[-1]
    return out


def _tile_circle(xs, Fs, reps=(-1, 0, 1, 2)):
    """Extended CDF rows covering several periods."""
    X = np.concatenate([xs + TWO_PI * m for m in reps], axis=1)
    F = np.concatenate([Fs + m for m in reps], axis=1)
    return X, F


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Cdf1D:
    """Monotone piecewise-linear CDF given by breakpoints.

    Vertical segments (repeated ``x``) are jumps; evaluation is
    right-continuous.  For the circle flavor the breakpoints span
    ``[0, 2pi]`` with values from 0 to 1 and the function is continued by
    ``F(x + 2pi) = F(x) + 1``.
    """

    flavor: str
    xs: np.ndarray
    Fs: np.ndarray

    def __post_init__(self):
        _check_flavor(self.flavor)
        xs = np.asarray(self.xs, dtype=float)
        Fs = np.asarray(self.Fs, dtype=float)
        if xs.shape != Fs.shape or xs.ndim != 1 or xs.size < 2:
            raise ValueError("breakpoints xs and Fs must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(xs) < 0) or np.any(np.diff(Fs) < -1e-15):
            raise ValueError("CDF breakpoints must be nondecreasing")
        Fs = np.maximum.accumulate(Fs)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "Fs", Fs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(1, -1)
        if self.flavor == CIRCLE:
            m = np.floor(flat / TWO_PI)
            val = _cdf_rows(self.xs[None], self.Fs[None], flat - TWO_PI * m) + m
        else:
            val = _cdf_rows(self.xs[None], self.Fs[None], flat)
        val = val.reshape(x.shape)
        return val if val.ndim else float(val)

    def quantile(self, r):
        """Generalized inverse ``min{x : F(x) >= r}``.

        ``r`` must lie in [0, 1] for the interval; on the circle any real
        level is accepted through the extension rule.
        """
        r = np.asarray(r, dtype=float)
        flat = r.reshape(1, -1)
        if self.flavor == CIRCLE:
            m = np.ceil(flat) - 1.0
            q = _quantile_rows(self.xs[None], self.Fs[None], flat - m) + TWO_PI * m
        else:
            if np.any(flat < -1e-15) or np.any(flat > 1.0 + 1e-15):
                raise ValueError("quantile level r must lie in [0, 1]")
            q = _quantile_rows(self.xs[None], self.Fs[None], flat)
        q = q.reshape(r.shape)
        return q if q.ndim else float(q)


def _reanchor_circle(xs, Fs):
    """Turn one period of an extended circular CDF into breakpoints on [0, 2pi].

    ``xs`` spans ``[a, a + 2pi]`` and ``Fs`` rises by exactly 1 over it.  The
    result starts at ``(0, 0)`` (left limit at 0) and ends at ``(2pi, 1)``.
    """
    # pin the span to one period so that the tiled copies cannot overlap
    xs = np.minimum(xs, xs[0] + TWO_PI)
    xs[-1] = xs[0] + TWO_PI
    # the last breakpoint of each copy coincides with the first of the next
    X = np.concatenate([xs[:-1] - TWO_PI, xs[:-1], xs + TWO_PI])
    F = np.concatenate([Fs[:-1] - 1.0, Fs[:-1], Fs + 1.0])
    # (x + 2pi) - 2pi can land one ulp below x
    X = np.maximum.accumulate(X)

    def left_limit(y):
        i = int(np.searchsorted(X, y, side="left"))
        i = min(max(i, 1), X.size - 1)
        x0, x1, f0, f1 = X[i - 1], X[i], F[i - 1], F[i]
        if X[i] == y or x1 == x0:
            return F[i]
        return f0 + (y - x0) / (x1 - x0) * (f1 - f0)

    g0 = left_limit(0.0)
    inside = (X >= 0.0) & (X < TWO_PI)
    xs_new = np.concatenate([[0.0], X[inside], [TWO_PI]])
    Fs_new = np.concatenate([[g0], F[inside], [g0 + 1.0]]) - g0
    Fs_new = np.clip(Fs_new, 0.0, 1.0)
    Fs_new[-1] = 1.0
    Fs_new = np.maximum.accumulate(Fs_new)
    # drop repeated breakpoints (a node exactly at 0 without an atom there)
    keep = np.concatenate([[True], (np.diff(xs_new) > 0) | (np.diff(Fs_new) > 0)])
    return xs_new[keep], Fs_new[keep]


@dataclass(frozen=True)
class Measure1D:
    """Probability measure on the interval or the circle.

    Build instances with :meth:`from_atoms`, :meth:`from_density` or
    :meth:`from_cdf`.  ``kind`` records the construction ("atoms" or
    "density") for serialization; ``atoms`` / ``nodes`` keep the original
    description where available.
    """

    flavor: str
    cdf: Cdf1D
    kind: str = "density"
    positions: np.ndarray = None
    masses: np.ndarray = None

    @classmethod
    def from_atoms(cls, positions, masses, flavor=INTERVAL, normalize=False):
        _check_flavor(flavor)
        x = np.asarray(positions, dtype=float).ravel()
        m = np.asarray(masses, dtype=float).ravel()
        if x.shape != m.shape or x.size == 0:
            raise ValueError("positions and masses must be nonempty and of equal length")
        if np.any(m < 0):
            raise ValueError("masses must be nonnegative")
        total = m.sum()
        if normalize:
            if total <= 0:
                raise ValueError("masses sum to zero")
            m = m / total
        elif abs(total - 1.0) > _MASS_TOL * max(1, x.size):
            raise ValueError(f"masses sum to {total!r}, not 1")
        lo, hi = _DOMAIN[flavor]
        if flavor == CIRCLE:
            x = np.mod(x, TWO_PI)
            x = np.where(x >= TWO_PI, 0.0, x)
        elif np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise ValueError("interval positions must lie in [-1, 1]")
        else:
            x = np.clip(x, lo, hi)
        order = np.argsort(x, kind="stable")
        x, m = x[order], m[order]
        F = np.cumsum(m)
        F = F / F[-1]
        before = np.concatenate([[0.0], F[:-1]])
        # atom i contributes the vertical segment (x_i, F_{i-1}) -> (x_i, F_i)
        xs = np.concatenate([[lo], np.repeat(x, 2), [hi]])
        Fs = np.concatenate([[0.0], np.stack([before, F], 1).ravel(), [1.0]])
        return cls(flavor, Cdf1D(flavor, xs, Fs), "atoms", x, m)

    @classmethod
    def from_density(cls, nodes, values, weights=None, flavor=INTERVAL, normalize=True):
        """Piecewise-uniform measure from nonnegative samples.

        Node ``k`` owns a cell of length ``weights[k]`` carrying mass
        ``weights[k] * values[k]``; cells are laid out in node order starting
        at the left end of the domain (interval) or centred at the first node
        (circle).  Without weights the Voronoi cells of the nodes are used.
        """
        _check_flavor(flavor)
        t = np.asarray(nodes, dtype=float).ravel()
        v = np.asarray(values, dtype=float).ravel()
        if t.shape != v.shape or t.size == 0:
            raise ValueError("nodes and values must be nonempty and of equal length")
        if np.any(v < 0):
            raise ValueError("density values must be nonnegative (clip first)")
        if np.any(np.diff(t) <= 0):
            raise ValueError("density nodes must be strictly increasing")
        lo, hi = _DOMAIN[flavor]
        if weights is None:
            if flavor == INTERVAL:
                edges = np.concatenate([[lo], 0.5 * (t[1:] + t[:-1]), [hi]])
            else:
                gap = t[0] + TWO_PI - t[-1]
                edges = np.concatenate([[t[0] - 0.5 * gap], 0.5 * (t[1:] + t[:-1]), [t[-1] + 0.5 * gap]])
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != t.shape or np.any(w <= 0):
                raise ValueError("weights must be positive and match nodes")
            if abs(w.sum() - (hi - lo)) > 1e-9 * (hi - lo):
                raise ValueError(f"cell weights must sum to the domain length {hi - lo}")
            start = lo if flavor == INTERVAL else t[0] - 0.5 * w[0]
            edges = start + np.concatenate([[0.0], np.cumsum(w)])
            edges[-1] = start + (hi - lo)
        cell = v * np.diff(edges)
        total = cell.sum()
        if total <= 0:
            raise ValueError("density has zero mass")
        if not normalize and abs(total - 1.0) > 1e-9:
            raise ValueError(f"density mass {total!r} differs from 1")
        F = np.concatenate([[0.0], np.cumsum(cell)]) / total
        if flavor == CIRCLE:
            xs, Fs = _reanchor_circle(edges, F)
        else:
            xs, Fs = edges, F
        return cls(flavor, Cdf1D(flavor, xs, Fs), "density", t, cell / total)

    @classmethod
    def from_cdf(cls, xs, Fs, flavor=INTERVAL):
        """Measure with the given CDF breakpoints (interval: spanning [-1, 1];
        circle: one period of an extended CDF, re-anchored at 0)."""
        _check_flavor(flavor)
        xs = np.asarray(xs, dtype=float)
        Fs = np.asarray(Fs, dtype=float)
        if flavor == CIRCLE:
            xs, Fs = _reanchor_circle(xs, Fs)
        else:
            Fs = (Fs - Fs[0]) / (Fs[-1] - Fs[0])
            xs = np.concatenate([[-1.0], np.clip(xs, -1.0, 1.0), [1.0]])
            Fs = np.concatenate([[0.0], Fs, [1.0]])
        return cls(flavor, Cdf1D(flavor, xs, Fs), "density")

    def cell_masses(self, edges):
        """Masses of the cells ``[edges[k], edges[k+1])`` (exact CDF differences)."""
        edges = np.asarray(edges, dtype=float)
        F = self.cdf(edges)
        return np.diff(F)

    def density_on(self, nodes, weights=None):
        """Average density over the cells of ``nodes`` (as in :meth:`from_density`)."""
        t = np.asarray(nodes, dtype=float)
        lo, hi = _DOMAIN[self.flavor]
        if weights is None:
            if self.flavor == INTERVAL:
                edges = np.concatenate([[lo], 0.5 * (t[1:] + t[:-1]), [hi]])
            else:
                gap = t[0] + TWO_PI - t[-1]
                edges = np.concatenate([[t[0] - 0.5 * gap], 0.5 * (t[1:] + t[:-1]), [t[-1] + 0.5 * gap]])
        else:
            w = np.asarray(weights, dtype=float)
            start = lo if self.flavor == INTERVAL else t[0] - 0.5 * w[0]
            edges = start + np.concatenate([[0.0], np.cumsum(w)])
        return np.diff(self.cdf(edges)) / np.diff(edges)

    def total_mass(self):
        return 1.0


def cdf(mu):
    return mu.cdf


def quantile(F, r):
    if isinstance(F, Measure1D):
        F = F.cdf
    return F.quantile(r)


# ---------------------------------------------------------------------------
# Wasserstein distances


def _stack(measures, flavor):
    for m in measures:
        if m.flavor != flavor:
            raise ValueError(f"flavor mismatch: expected {flavor}, got {m.flavor}")
    return _pad_rows([m.cdf.xs for m in measures]), _pad_rows([m.cdf.Fs for m in measures])


def _interval_pow(xa, Fa, xb, Fb, p):
    knots = np.sort(np.concatenate([Fa, Fb], axis=1), axis=1)
    knots = np.clip(knots, 0.0, 1.0)
    return _lp_pow_quantile_gap(
        knots,
        lambda r: _quantile_rows(xa, Fa, r),
        lambda r: _quantile_rows(xb, Fb, r),
        p,
    )


def wasserstein_interval_batch(mus, nus, p=2.0, power=False):
    """Row-wise ``W_p`` (or ``W_p^p`` with ``power=True``) between lists of interval measures."""
    if len(mus) != len(nus):
        raise ValueError("batches must have equal length")
    xa, Fa = _stack(mus, INTERVAL)
    xb, Fb = _stack(nus, INTERVAL)
    val = np.maximum(_interval_pow(xa, Fa, xb, Fb, float(p)), 0.0)
    return val if power else val ** (1.0 / p)


def wasserstein_interval(mu, nu, p=2.0):
    """``W_p`` on [-1, 1] as the L^p distance of the quantile functions."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(wasserstein_interval_batch([mu], [nu], p)[0])


def _period_window(Xb, FbT, theta, period):
    """Per row, the ``period + 2`` tiled breakpoints whose levels cover
    ``[theta, theta + 1]``."""
    j0 = _searchsorted_rows(FbT, theta[:, None], side="right")[:, 0] - 1
    j0 = np.clip(j0, 0, FbT.shape[1] - period - 2)
    idx = j0[:, None] + np.arange(period + 2)
    return np.take_along_axis(Xb, idx, 1), np.take_along_axis(FbT, idx, 1)


def _circle_objective(xa, Fa, Xb, FbT, theta, p):
    """``int_0^1 |Q_a(r) - Q_b(r + theta)|^p dr`` for each row (theta shape (B,)).

    ``Xb``, ``FbT`` are tiled rows from :func:`_tile_circle`; only the window
    of one period above ``theta`` enters the level partition.
    """
    Xw, Fw = _period_window(Xb, FbT, theta, Xb.shape[1] // 4)
    shifted = np.clip(Fw - theta[:, None], 0.0, 1.0)
    knots = np.sort(np.concatenate([Fa, shifted], axis=1), axis=1)
    return _lp_pow_quantile_gap(
        knots,
        lambda r: _quantile_rows(xa, Fa, r),
        lambda r: _quantile_rows(Xw, Fw, r + theta[:, None]),
        p,
    )


def _nearest_level_difference(Fa, FbT, theta):
    """Per row, the value ``FbT_j - Fa_i`` closest to ``theta``."""
    target = theta[:, None] + Fa
    K = FbT.shape[1]
    j = np.clip(_searchsorted_rows(FbT, target, side="left"), 1, K - 1)
    cands = np.stack([np.take_along_axis(FbT, j - 1, 1), np.take_along_axis(FbT, j, 1)], -1) - Fa[:, :, None]
    cands = cands.reshape(Fa.shape[0], -1)
    pick = np.argmin(np.abs(cands - theta[:, None]), axis=1)
    return np.clip(cands[np.arange(Fa.shape[0]), pick], -1.0, 1.0)


def _circle_minimize(xa, Fa, xb, Fb, p, tol=1e-12):
    """Golden-section search of the convex shift objective over theta in [-1, 1]."""
    Xb, FbT = _tile_circle(xb, Fb)
    B = xa.shape[0]
    lo = np.full(B, -1.0)
    hi = np.full(B, 1.0)
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = _circle_objective(xa, Fa, Xb, FbT, c, p)
    fd = _circle_objective(xa, Fa, Xb, FbT, d, p)
    while np.max(hi - lo) > tol:
        left = fc <= fd
        hi = np.where(left, d, hi)
        lo = np.where(left, lo, c)
        new_c = np.where(left, hi - _GOLDEN * (hi - lo), d)
        new_d = np.where(left, c, lo + _GOLDEN * (hi - lo))
        probe = np.where(left, new_c, new_d)
        fp = _circle_objective(xa, Fa, Xb, FbT, probe, p)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = new_c, new_d
    theta = np.where(fc <= fd, c, d)
    best = np.minimum(fc, fd)
    # For atoms the objective is piecewise linear in theta with kinks where a
    # level of one CDF meets a shifted level of the other; snapping to the
    # nearest such difference makes the minimum exact.
    snapped = _nearest_level_difference(Fa, FbT, theta)
    fs = _circle_objective(xa, Fa, Xb, FbT, snapped, p)
    better = fs < best
    theta = np.where(better, snapped, theta)
    best = np.where(better, fs, best)
    # the endpoints are candidates as well (objective is convex but may be flat)
    for edge in (-1.0, 1.0):
        fe = _circle_objective(xa, Fa, Xb, FbT, np.full(B, edge), p)
        better = fe < best
        theta = np.where(better, edge, theta)
        best = np.where(better, fe, best)
    return theta, np.maximum(best, 0.0)


def _order_key(mu):
    return (mu.cdf.xs.size, mu.cdf.xs.tobytes(), mu.cdf.Fs.tobytes())


def wasserstein_circle_batch(mus, nus, p=2.0, power=False, return_shift=False):
    """Row-wise circular ``W_p`` between lists of circle measures."""
    if len(mus) != len(nus):
        raise ValueError("batches must have equal length")
    # evaluate every pair in a canonical order so that W(a, b) == W(b, a)
    # bit for bit; swapping the roles negates the shift
    swap = np.array([_order_key(a) > _order_key(b) for a, b in zip(mus, nus)], dtype=bool)
    first = [b if s else a for a, b, s in zip(mus, nus, swap)]
    second = [a if s else b for a, b, s in zip(mus, nus, swap)]
    xa, Fa = _stack(first, CIRCLE)
    xb, Fb = _stack(second, CIRCLE)
    theta, val = _circle_minimize(xa, Fa, xb, Fb, float(p))
    theta = np.where(swap, -theta, theta)
    val = val if power else val ** (1.0 / p)
    return (val, theta) if return_shift else val


def wasserstein_circle(mu, nu, p=2.0):
    """Circular ``W_p``: minimum over level shifts theta of the quantile gap.

    The shift convention is ``(F_nu - theta)^{-1}(r) = F_nu^{-1}(r + theta)``;
    theta is searched on [-1, 1], which contains every minimizer.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(wasserstein_circle_batch([mu], [nu], p)[0])


def optimal_shift(mu, nu, p=2.0):
    """Minimizing level shift theta of :func:`wasserstein_circle`."""
    _, theta = wasserstein_circle_batch([mu], [nu], p, return_shift=True)
    return float(theta[0])


# ---------------------------------------------------------------------------
# cumulative distribution transforms


@dataclass(frozen=True)
class CdtFunction:
    """Transport displacement ``h`` sampled at the reference CDF breakpoints.

    ``points`` are the breakpoints of the reference measure, ``values`` the
    displacement there, ``levels`` the reference CDF at ``points``.  On the
    circle ``shift`` stores the optimal level shift theta.
    """

    flavor: str
    points: np.ndarray
    values: np.ndarray
    levels: np.ndarray
    shift: float = 0.0

    def scaled(self, delta):
        return CdtFunction(self.flavor, self.points, delta * self.values, self.levels, self.shift)

    def __call__(self, x):
        """Piecewise-linear interpolation of the displacement."""
        return np.interp(x, self.points, self.values)


def _check_reference(omega):
    if omega.kind == "atoms":
        raise ValueError("the CDT reference must be absolutely continuous, not atomic")
    xs, Fs = omega.cdf.xs, omega.cdf.Fs
    dx = np.diff(xs)
    dF = np.diff(Fs)
    if np.any((dx > 0) & (dF <= 0)) or np.any((dx == 0) & (dF > 0)):
        raise ValueError("the CDT reference density must be strictly positive")


def cdt(mu, omega):
    """``F_mu^{-1}(F_omega(x)) - x`` at the reference breakpoints."""
    if mu.flavor != INTERVAL or omega.flavor != INTERVAL:
        raise ValueError("cdt expects interval measures; use ccdt on the circle")
    _check_reference(omega)
    x, F = omega.cdf.xs, omega.cdf.Fs
    q = mu.cdf.quantile(np.clip(F, 0.0, 1.0))
    return CdtFunction(INTERVAL, x.copy(), q - x, F.copy())


def icdt(h, omega):
    """Push-forward of the reference through ``h + Id`` (monotone rearrangement)."""
    if h.flavor != INTERVAL:
        raise ValueError("icdt expects an interval displacement")
    g = np.maximum.accumulate(np.clip(h.points + h.values, -1.0, 1.0))
    return Measure1D.from_cdf(g, h.levels, INTERVAL)


def ccdt(mu, omega):
    """Circular CDT: ``F_mu^{-1}(F_omega(x) + theta) - x`` with the optimal p=2 shift."""
    if mu.flavor != CIRCLE or omega.flavor != CIRCLE:
        raise ValueError("ccdt expects circle measures")
    _check_reference(omega)
    theta = optimal_shift(omega, mu, 2.0)
    x, F = omega.cdf.xs, omega.cdf.Fs
    q = mu.cdf.quantile(F + theta)
    return CdtFunction(CIRCLE, x.copy(), q - x, F.copy(), theta)


def iccdt(h, omega):
    """Push-forward of the reference through ``iota o (h + Id)``."""
    if h.flavor != CIRCLE:
        raise ValueError("iccdt expects a circular displacement")
    g = np.maximum.accumulate(h.points + h.values)
    # one period of the image must span exactly 2pi
    g = np.minimum(g, g[0] + TWO_PI)
    return Measure1D.from_cdf(g, h.levels, CIRCLE)


def _mixed_quantile_breakpoints(knots, qa, qb, delta):
    """CDF breakpoints of the quantile map ``(1 - delta) qa + delta qb``.

    Both maps are linear between consecutive ``knots``; the end values of each
    piece are extrapolated from its quarter points so that jumps of either
    quantile map (flat pieces of a CDF) are resolved exactly.
    """
    r0, r1 = knots[:-1], knots[1:]
    keep = r1 > r0
    r0, r1 = r0[keep], r1[keep]
    dr = r1 - r0
    probes = np.concatenate([r0 + 0.25 * dr, r0 + 0.75 * dr])
    q = (1.0 - delta) * qa(probes) + delta * qb(probes)
    n = r0.size
    g1, g2 = q[:n], q[n:]
    u0 = 1.5 * g1 - 0.5 * g2
    u1 = 1.5 * g2 - 0.5 * g1
    xs = np.maximum.accumulate(np.stack([u0, u1], 1).ravel())
    Fs = np.stack([r0, r1], 1).ravel()
    return xs, Fs


def interpolate_interval(mu, nu, delta):
    """Displacement interpolation ``(delta CDT_mu[nu] + Id)_# mu``.

    The push-forward has quantile function ``(1 - delta) F_mu^{-1} +
    delta F_nu^{-1}``, which is piecewise linear on the merged level
    partition and is therefore represented without resampling.
    """
    if mu.flavor != INTERVAL or nu.flavor != INTERVAL:
        raise ValueError("interpolate_interval expects interval measures")
    knots = np.unique(np.clip(np.concatenate([mu.cdf.Fs, nu.cdf.Fs, [0.0, 1.0]]), 0.0, 1.0))
    xs, Fs = _mixed_quantile_breakpoints(knots, mu.cdf.quantile, nu.cdf.quantile, delta)
    return Measure1D.from_cdf(np.clip(xs, -1.0, 1.0), Fs, INTERVAL)


def interpolate_circle(mu, nu, delta, theta=None):
    """Circular geodesic interpolation ``iota o (delta cCDT_mu[nu] + Id)_# mu``.

    Same construction as :func:`interpolate_interval` with the optimal
    ``p = 2`` level shift theta applied to ``nu``.  A precomputed shift (for
    example from :func:`wasserstein_circle_batch`) may be passed in.
    """
    if mu.flavor != CIRCLE or nu.flavor != CIRCLE:
        raise ValueError("interpolate_circle expects circle measures")
    if theta is None:
        theta = optimal_shift(mu, nu, 2.0)
    shifted = np.concatenate([nu.cdf.Fs - theta, nu.cdf.Fs - theta + 1.0, nu.cdf.Fs - theta - 1.0])
    knots = np.unique(np.clip(np.concatenate([mu.cdf.Fs, shifted, [0.0, 1.0]]), 0.0, 1.0))
    xs, Fs = _mixed_quantile_breakpoints(
        knots, mu.cdf.quantile, lambda r: nu.cdf.quantile(r + theta), delta
    )
    return Measure1D.from_cdf(xs, Fs, CIRCLE)


def cdt_batch(mus, omega):
    """Displacement values of :func:`cdt` for many measures, shape (B, K)."""
    _check_reference(omega)
    xs, Fs = _stack(mus, INTERVAL)
    x, F = omega.cdf.xs, omega.cdf.Fs
    levels = np.broadcast_to(np.clip(F, 0.0, 1.0), (xs.shape[0], F.size))
    return _quantile_rows(xs, Fs, levels) - x


def ccdt_batch(mus, omega):
    """Displacement values and shifts of :func:`ccdt` for many measures."""
    _check_reference(omega)
    xb, Fb = _stack(mus, CIRCLE)
    B = xb.shape[0]
    xw = np.broadcast_to(omega.cdf.xs, (B, omega.cdf.xs.size))
    Fw = np.broadcast_to(omega.cdf.Fs, (B, omega.cdf.Fs.size))
    if _is_uniform_circle(omega):
        # Q_mu(s) - 2 pi s is 1-periodic, so the shifted quadratic cost is
        # minimized where theta offsets its mean: theta = 1/2 - E_mu[x] / 2pi
        mean = 0.5 * np.sum(np.diff(Fb, axis=1) * (xb[:, 1:] + xb[:, :-1]), axis=1)
        theta = 0.5 - mean / TWO_PI
    else:
        theta, _ = _circle_minimize(xw, Fw, xb, Fb, 2.0)
    X, FT = _tile_circle(xb, Fb)
    q = _quantile_rows(X, FT, Fw + theta[:, None])
    return q - xw, theta


def uniform_reference(flavor, cells):
    """Uniform probability measure on ``cells`` equal cells of the domain."""
    _check_flavor(flavor)
    lo, hi = _DOMAIN[flavor]
    w = (hi - lo) / cells
    return Measure1D.from_density(lo + w * (np.arange(cells) + 0.5), np.ones(cells), np.full(cells, w), flavor)


def _uniform_cells_cdf(masses, flavor):
    masses = np.atleast_2d(np.asarray(masses, dtype=float))
    if np.any(masses < 0):
        raise ValueError("cell masses must be nonnegative")
    total = masses.sum(axis=1, keepdims=True)
    if np.any(total <= 0):
        raise ValueError("a row has zero mass")
    B, K = masses.shape
    lo, hi = _DOMAIN[flavor]
    xs = np.broadcast_to(np.linspace(lo, hi, K + 1), (B, K + 1))
    Fs = np.concatenate([np.zeros((B, 1)), np.cumsum(masses, axis=1)], axis=1) / total
    Fs[:, -1] = 1.0
    return xs, Fs


def cdt_uniform_rows(masses, ref_cells):
    """CDT w.r.t. the uniform measure on [-1, 1] for many piecewise-uniform rows.

    ``masses[b, k]`` is the mass of row ``b`` on the ``k``-th of ``K`` equal
    cells of [-1, 1].  Returns the displacement at the ``ref_cells + 1``
    breakpoints of the uniform reference; equals :func:`cdt_batch` with
    ``uniform_reference(INTERVAL, ref_cells)``.
    """
    xs, Fs = _uniform_cells_cdf(masses, INTERVAL)
    levels = np.linspace(0.0, 1.0, ref_cells + 1)
    x = -1.0 + 2.0 * levels
    q = _quantile_rows(xs, Fs, np.broadcast_to(levels, (xs.shape[0], levels.size)))
    return q - x


def ccdt_uniform_rows(masses, ref_cells):
    """cCDT w.r.t. the uniform measure on the circle for many rows of cell
    masses on ``K`` equal cells of ``[0, 2pi)``; returns ``(values, theta)``."""
    xs, Fs = _uniform_cells_cdf(masses, CIRCLE)
    mean = 0.5 * np.sum(np.diff(Fs, axis=1) * (xs[:, 1:] + xs[:, :-1]), axis=1)
    theta = 0.5 - mean / TWO_PI
    levels = np.linspace(0.0, 1.0, ref_cells + 1)
    X, FT = _tile_circle(xs, Fs)
    q = _quantile_rows(X, FT, levels[None, :] + theta[:, None])
    return q - TWO_PI * levels, theta


def _is_uniform_circle(omega):
    xs, Fs = omega.cdf.xs, omega.cdf.Fs
    return omega.flavor == CIRCLE and np.allclose(Fs, xs / TWO_PI, rtol=0.0, atol=1e-14)


def cdt_l2_distance(h1, h2):
    """``L^2(omega)`` distance between two displacements on one reference.

    The difference is taken piecewise linear between reference breakpoints
    and integrated exactly against the piecewise-uniform reference.
    """
    if h1.points.shape != h2.points.shape or np.any(h1.points != h2.points):
        raise ValueError("displacements live on different reference grids")
    d = h1.values - h2.values
    dF = np.diff(h1.levels)
    a, b = d[:-1], d[1:]
    return float(np.sqrt(np.sum(dF * (a * a + a * b + b * b) / 3.0)))


# ---------------------------------------------------------------------------
# serialization


def measure_to_csv(mu, path):
    """Write atoms as ``position,mass`` or a density as ``node,value`` rows."""
    with open(path, "w") as fh:
        fh.write(f"# flavor={mu.flavor} kind={mu.kind}\n")
        if mu.kind == "atoms":
            fh.write("position,mass\n")
            for x, m in zip(mu.positions, mu.masses):
                fh.write(f"{float(x)!r},{float(m)!r}\n")
        else:
            if mu.positions is None:
                raise ValueError("only densities built from nodes can be written")
            dens = mu.density_on(mu.positions)
            fh.write("node,value\n")
            for x, v in zip(mu.positions, dens):
                fh.write(f"{float(x)!r},{float(v)!r}\n")


def measure_from_csv(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError(f"{path}: missing '# flavor=... kind=...' header")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split() if "=" in tok)
    flavor = meta.get("flavor")
    if flavor not in _DOMAIN:
        raise ValueError(f"{path}: bad flavor field {flavor!r}")
    columns = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns")
    if columns == ["position", "mass"]:
        return Measure1D.from_atoms(data[:, 0], data[:, 1], flavor, normalize=True)
    if columns == ["node", "value"]:
        return Measure1D.from_density(data[:, 0], data[:, 1], None, flavor)
    raise ValueError(f"{path}: unknown column header {lines[1]!r}")

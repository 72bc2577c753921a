"""Experiments on S^2: vMF densities, CDT interpolation and classification.

* :func:`vmf_density` samples (mixtures of, optionally symmetrized) von
  Mises-Fisher densities on a sphere grid.
* :func:`vcdt_interpolate` / :func:`wcdt_interpolate` interpolate two
  densities slice by slice in CDT space and return to the sphere through
  the pseudoinverse or the regularized inverse of the transform.
* :func:`generate_dataset`, :func:`extract_features` and
  :func:`crossvalidate` reproduce the linear-separability study.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .geometry import random_unit_vectors, unit
from .harmonic_transforms import (
    analyze_s2,
    semicircle_pinv,
    semicircle_slices,
    vslice_pinv,
    vslice_values,
)
from .inversion import PdParams, pd_invert
from .ot1d import (
    CIRCLE,
    INTERVAL,
    Measure1D,
    ccdt_uniform_rows,
    cdt_uniform_rows,
    interpolate_circle,
    interpolate_interval,
    wasserstein_circle_batch,
)
from .quadrature import GridDensity, cylinder_grid, so3_grid, sphere_grid
from .sliced_distances import clip_fraction, clip_slices, fine_grid

__all__ = [
    "VmfSpec",
    "vmf_density",
    "InterpConfig",
    "vcdt_interpolate",
    "wcdt_interpolate",
    "DatasetSpec",
    "generate_dataset",
    "FeatureConfig",
    "extract_features",
    "feature_matrix",
    "LinearSvm",
    "RidgeClassifier",
    "CvResult",
    "crossvalidate",
    "worker_count",
    "balanced_folds",
    "dataset_means",
]

log = logging.getLogger(__name__)


def worker_count():
    """Worker cap from ``SPHEREOT_THREADS`` (default 1)."""
    raw = os.environ.get("SPHEREOT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"SPHEREOT_THREADS={raw!r} is not an integer") from None
    if n < 1:
        raise ValueError(f"SPHEREOT_THREADS={n} must be positive")
    return n


# ---------------------------------------------------------------------------
# von Mises-Fisher densities


@dataclass(frozen=True)
class VmfSpec:
    """A vMF density, or a convex mixture of vMF specs when ``mixture`` is set.

    ``mixture`` holds ``(weight, VmfSpec)`` pairs whose weights sum to 1; the
    own ``kappa``/``eta`` are then unused.  ``symmetrize`` averages the
    result with its mirror image at the equatorial plane.
    """

    kappa: float = 50.0
    eta: tuple = (0.0, 0.0, 1.0)
    mixture: tuple = ()
    symmetrize: bool = False

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa={self.kappa} must be positive")
        eta = np.asarray(self.eta, dtype=float)
        if eta.shape != (3,) or not np.linalg.norm(eta) > 0:
            raise ValueError(f"eta={self.eta} must be a nonzero 3-vector")
        object.__setattr__(self, "eta", tuple(unit(eta)))
        mixture = tuple((float(w), s) for w, s in self.mixture)
        if mixture:
            weights = np.array([w for w, _ in mixture])
            if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
                raise ValueError(f"mixture weights {weights.tolist()} must be nonnegative and sum to 1")
        object.__setattr__(self, "mixture", mixture)

    @classmethod
    def equal_mixture(cls, etas, kappa=50.0, symmetrize=False):
        parts = tuple((1.0 / len(etas), cls(kappa, tuple(e))) for e in etas)
        return cls(kappa, tuple(etas[0]), parts, symmetrize)


def _vmf_values(kappa, eta, xi):
    # kappa / (4 pi sinh kappa) e^{kappa <eta, xi>} without overflow;
    # -expm1(-2 kappa) keeps the kappa -> 0 limit 1 / (4 pi) accurate
    c = kappa / (2.0 * np.pi * -np.expm1(-2.0 * kappa))
    return c * np.exp(kappa * (xi @ np.asarray(eta) - 1.0))


def _vmf_raw(spec, xi):
    if spec.mixture:
        return sum(w * _vmf_raw(s, xi) for w, s in spec.mixture)
    return _vmf_values(spec.kappa, spec.eta, xi)


def vmf_density(spec, grid, normalize=True):
    """Samples of the density described by ``spec`` at the nodes of ``grid``.

    The samples use the analytic constant, which makes the continuous
    integral 1.  For large ``kappa`` on coarse grids the quadrature mass then
    deviates (by about 8e-5 at ``kappa = 50``, ``N = 16``), so by default the
    samples are rescaled to quadrature mass 1; ``normalize=False`` keeps the
    analytic constant.
    """
    xi = grid.nodes
    vals = _vmf_raw(spec, xi)
    if spec.symmetrize:
        vals = 0.5 * (vals + _vmf_raw(spec, xi * np.array([1.0, 1.0, -1.0])))
    if normalize:
        vals = vals / grid.integrate(vals)
    return GridDensity(grid, vals)


# ---------------------------------------------------------------------------
# CDT interpolation


@dataclass(frozen=True)
class InterpConfig:
    """Discretization of the slice-wise interpolation.

    Attributes
    ----------
    slice_points : int
        Cells of the fine 1-D grid on which slices are sampled.
    G : int, optional
        Size of the gamma grid for the semicircle transform (default 2N+1).
    clip_warn : float
        Relative negative slice mass above which clipping is logged.
    pd : PdParams
        Parameters of the regularized inverse.
    """

    slice_points: int = 256
    G: int = None
    clip_warn: float = 1e-4
    pd: PdParams = field(default_factory=PdParams)

    def __post_init__(self):
        if self.slice_points < 2:
            raise ValueError(f"slice_points={self.slice_points} must be at least 2")


def _check_inputs(mu, nu, delta, mode):
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta={delta} must lie in [0, 1]")
    if mode not in ("pinv", "reg", "regularized"):
        raise ValueError(f"mode must be 'pinv' or 'regularized', got {mode!r}")
    for name, f in (("mu", mu), ("nu", nu)):
        if f.grid.kind != "sphere":
            raise ValueError(f"{name} must be sampled on a sphere grid")
        if np.any(f.values < 0) or abs(f.mass() - 1.0) > 1e-6:
            raise ValueError(f"{name} is not a probability density (mass {f.mass():.8f})")
    if mu.grid.N != nu.grid.N:
        raise ValueError(f"band-limits differ: {mu.grid.N} vs {nu.grid.N}")


def _slice_measures(rows, nodes, cell, flavor):
    w = np.full(nodes.size, cell)
    return [Measure1D.from_density(nodes, r, w, flavor) for r in rows]


def _window_density(measures, points, width, flavor):
    """Average density of each measure over windows of ``width`` around ``points``."""
    lo, hi = points - 0.5 * width, points + 0.5 * width
    if flavor == INTERVAL:
        lo, hi = np.maximum(lo, -1.0), np.minimum(hi, 1.0)
    return np.array([(m.cdf(hi) - m.cdf(lo)) / (hi - lo) for m in measures])


def _invert(g, mode, params, pinv):
    if mode == "pinv":
        return pinv(g)
    return pd_invert(g, params).density


def vcdt_interpolate(mu, nu, delta, mode="pinv", cfg=InterpConfig()):
    """Interpolate two densities through the CDT of their vertical slices.

    For every direction ``psi`` of the cylinder grid the slices
    ``V_psi mu`` and ``V_psi nu`` are sampled on a fine grid, interpolated
    by :func:`interpolate_interval` and averaged back onto the Gauss nodes.
    The result is mapped to the sphere by the pseudoinverse (``mode="pinv"``)
    or the regularized inverse (``mode="regularized"``).
    """
    _check_inputs(mu, nu, delta, mode)
    N = mu.grid.N
    cyl = cylinder_grid(N)
    nodes, cell = fine_grid(INTERVAL, cfg.slice_points)
    slices = []
    for name, f in (("mu", mu), ("nu", nu)):
        # V_psi f as a density on I is 2pi times the transform on T x I
        rows = 2.0 * np.pi * vslice_values(analyze_s2(f), cyl.psi, nodes)
        slices.append(_slice_measures(clip_slices(rows, cell, cfg.clip_warn, f"vertical slice of {name}"), nodes, cell, INTERVAL))
    mids = [interpolate_interval(a, b, delta) for a, b in zip(*slices)]
    dens = _window_density(mids, cyl.t, cell, INTERVAL) / (2.0 * np.pi)  # (psi, t)
    g = GridDensity(cyl, dens.T.ravel())
    return _invert(g, mode, cfg.pd, vslice_pinv)


def wcdt_interpolate(mu, nu, delta, mode="pinv", cfg=InterpConfig()):
    """Interpolate two densities through the cCDT of their semicircle slices.

    Circular slices are taken at every zenith of the SO(3) grid, interpolated
    by :func:`interpolate_circle` with the optimal level shift and averaged
    back onto the gamma grid before inversion.
    """
    _check_inputs(mu, nu, delta, mode)
    N = mu.grid.N
    so3 = so3_grid(N, cfg.G)
    nodes, cell = fine_grid(CIRCLE, cfg.slice_points)
    slices = []
    for name, f in (("mu", mu), ("nu", nu)):
        # W_{alpha,beta} f as a density on T is 4pi times the transform on SO(3)
        rows = 4.0 * np.pi * semicircle_slices(analyze_s2(f), so3.sphere, nodes)
        slices.append(_slice_measures(clip_slices(rows, cell, cfg.clip_warn, f"semicircle slice of {name}"), nodes, cell, CIRCLE))
    _, theta = wasserstein_circle_batch(slices[0], slices[1], 2.0, return_shift=True)
    mids = [interpolate_circle(a, b, delta, th) for a, b, th in zip(*slices, theta)]
    dens = _window_density(mids, so3.gamma, cell, CIRCLE) / (4.0 * np.pi)  # (zenith, gamma)
    g = GridDensity(so3, dens.ravel())
    return _invert(g, mode, cfg.pd, semicircle_pinv)


# ---------------------------------------------------------------------------
# datasets


_DATASETS = {
    1: ("single vMF", "two vMFs, means at distance pi/2"),
    2: ("single vMF", "two vMFs, independent means"),
    3: ("single vMF", "two vMFs, means mirrored at the equatorial plane"),
    4: ("single vMF", "two vMFs, means mirrored at the xi_3 axis"),
    5: ("two vMFs, means mirrored at the equatorial plane", "two vMFs, means mirrored at the xi_3 axis"),
}


@dataclass(frozen=True)
class DatasetSpec:
    """A labeled set of vMF densities; class 0 comes first, then class 1."""

    id: int
    n_per_class: int = 50
    seed: int = 0
    kappa: float = 50.0
    N: int = 16

    def __post_init__(self):
        if self.id not in _DATASETS:
            raise ValueError(f"dataset id={self.id!r} must be one of 1..5")
        if self.n_per_class < 1:
            raise ValueError(f"n_per_class={self.n_per_class} must be positive")
        if self.N < 1:
            raise ValueError(f"N={self.N} must be at least 1")

    @property
    def classes(self):
        return _DATASETS[self.id]


def _orthogonal_unit(rng, eta):
    while True:
        v = random_unit_vectors(rng, 1)[0]
        v = v - (v @ eta) * eta
        if np.linalg.norm(v) > 1e-3:
            return unit(v)


def _draw_means(rng, rule):
    eta = random_unit_vectors(rng, 1)[0]
    if rule == "single":
        return [eta]
    if rule == "orthogonal":
        return [eta, _orthogonal_unit(rng, eta)]
    if rule == "free":
        return [eta, random_unit_vectors(rng, 1)[0]]
    if rule == "equator":
        return [eta, eta * np.array([1.0, 1.0, -1.0])]
    if rule == "axis":
        return [eta, eta * np.array([-1.0, -1.0, 1.0])]
    raise ValueError(f"unknown rule {rule!r}")


_RULES = {
    1: ("single", "orthogonal"),
    2: ("single", "free"),
    3: ("single", "equator"),
    4: ("single", "axis"),
    5: ("equator", "axis"),
}


def dataset_means(spec):
    """Mean directions of every datum, as a list of (label, [eta, ...])."""
    out = []
    for label, rule in enumerate(_RULES[spec.id]):
        rng = np.random.default_rng([spec.seed, spec.id, label])
        out.extend((label, _draw_means(rng, rule)) for _ in range(spec.n_per_class))
    return out


def generate_dataset(spec):
    """List of ``(GridDensity, label)`` following the class rules of ``spec.id``.

    Densities are rescaled to quadrature mass 1 on ``sphere_grid(spec.N)``.
    """
    grid = sphere_grid(spec.N)
    data = []
    for label, etas in dataset_means(spec):
        vmf = VmfSpec.equal_mixture([tuple(e) for e in etas], spec.kappa)
        data.append((vmf_density(vmf, grid), label))
    return data


# ---------------------------------------------------------------------------
# features


@dataclass(frozen=True)
class FeatureConfig:
    """Sampling of the slice CDT features.

    ``interval_ref`` / ``circle_ref`` are the cell counts of the uniform
    reference measures; each slice contributes ``ref + 1`` values.
    """

    slice_points: int = 256
    interval_ref: int = 64
    circle_ref: int = 32
    clip_warn: float = 1e-4

    def __post_init__(self):
        if min(self.slice_points, self.interval_ref, self.circle_ref) < 2:
            raise ValueError("feature grid sizes must be at least 2")


def _features(f, transform, cfg):
    if f.grid.kind != "sphere":
        raise ValueError("features are defined for sphere-grid densities")
    if transform == "raw":
        return f.values.copy(), 0.0
    N = f.grid.N
    c = analyze_s2(f)
    if transform == "v":
        nodes, cell = fine_grid(INTERVAL, cfg.slice_points)
        rows, worst = clip_fraction(2.0 * np.pi * vslice_values(c, cylinder_grid(N).psi, nodes), cell)
        return cdt_uniform_rows(rows * cell, cfg.interval_ref).ravel(), worst
    if transform == "w":
        nodes, cell = fine_grid(CIRCLE, cfg.slice_points)
        rows, worst = clip_fraction(4.0 * np.pi * semicircle_slices(c, sphere_grid(N), nodes), cell)
        return ccdt_uniform_rows(rows * cell, cfg.circle_ref)[0].ravel(), worst
    raise ValueError(f"transform must be 'v', 'w' or 'raw', got {transform!r}")


def extract_features(f, transform, cfg=FeatureConfig()):
    """Feature vector of a sphere density.

    ``"v"``: CDT w.r.t. the uniform measure on I of each vertical slice at
    the cylinder-grid directions; ``"w"``: cCDT w.r.t. the uniform measure on
    T of each semicircle slice at the sphere-grid zeniths; ``"raw"``: the
    samples themselves.  Slices are clipped at 0 and renormalized first.
    """
    vec, worst = _features(f, transform, cfg)
    if worst > cfg.clip_warn:
        log.warning("%s-slices clipped: up to %.2e of the mass was negative", transform, worst)
    return vec


def feature_matrix(densities, transform, cfg=FeatureConfig(), workers=None):
    """Stack :func:`extract_features` over many densities (threaded).

    Clipping is reported once for the whole batch.
    """
    workers = worker_count() if workers is None else workers
    job = lambda f: _features(f, transform, cfg)
    if workers == 1:
        out = [job(f) for f in densities]
    else:
        with ThreadPoolExecutor(workers) as ex:
            out = list(ex.map(job, densities))
    worst = np.array([w for _, w in out])
    if np.any(worst > cfg.clip_warn):
        log.warning(
            "%s-slices clipped in %d of %d samples: up to %.2e of the mass was negative",
            transform, int(np.sum(worst > cfg.clip_warn)), worst.size, worst.max(),
        )
    return np.vstack([v for v, _ in out])


# ---------------------------------------------------------------------------
# classification


class LinearSvm:
    """L2-regularized hinge-loss classifier trained by Pegasos subgradient steps.

    Samples are visited in seeded random order for ``epochs`` passes with
    step ``1 / (lam t)``; the returned weights are the average of the
    iterates over the second half of training.  The bias is the weight of a
    constant extra feature.
    """

    def __init__(self, lam=0.1, epochs=200, seed=0):
        if lam <= 0 or epochs < 1:
            raise ValueError("lam and epochs must be positive")
        self.lam, self.epochs, self.seed = lam, epochs, seed

    def fit(self, X, y):
        X = _with_bias(X)
        s = np.where(np.asarray(y) > 0, 1.0, -1.0)
        n, d = X.shape
        rng = np.random.default_rng(self.seed)
        w = np.zeros(d)
        w_sum, count = np.zeros(d), 0
        t = 0
        for epoch in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.lam * t)
                hinge = s[i] * (X[i] @ w) < 1.0
                w *= 1.0 - eta * self.lam
                if hinge:
                    w += eta * s[i] * X[i]
                if 2 * epoch >= self.epochs:
                    w_sum += w
                    count += 1
        w = w_sum / count
        self.coef_, self.intercept_ = w[:-1], w[-1]
        return self

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)


def _with_bias(X):
    X = np.asarray(X, dtype=float)
    return np.hstack([X, np.ones((X.shape[0], 1))])


class RidgeClassifier:
    """Least squares on +-1 targets with a ridge penalty (closed form)."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        s = np.where(np.asarray(y) > 0, 1.0, -1.0)
        mean = X.mean(axis=0)
        Xc = X - mean
        A = Xc.T @ Xc + self.alpha * np.eye(X.shape[1])
        self.coef_ = np.linalg.solve(A, Xc.T @ (s - s.mean()))
        self.intercept_ = s.mean() - mean @ self.coef_
        return self

    def decision_function(self, X):
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)


@dataclass
class CvResult:
    mean: float
    std: float
    fold_accuracy: np.ndarray

    def __str__(self):
        return f"{self.mean:.3f} +- {self.std:.3f}"


def balanced_folds(labels, folds, seed=0):
    """Fold index per sample with every class spread evenly over the folds."""
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValueError("cross-validation needs at least two classes")
    rng = np.random.default_rng(seed)
    fold = np.empty(labels.size, dtype=int)
    for c in classes:
        idx = np.nonzero(labels == c)[0]
        if idx.size < folds:
            raise ValueError(f"class {c} has {idx.size} samples, fewer than folds={folds}")
        idx = rng.permutation(idx)
        fold[idx] = np.arange(idx.size) % folds
    return fold


def _pca(X_train, dim):
    """Mean, top principal axes and score scales fitted on the training split.

    The axes are the leading right singular vectors of the centred data,
    i.e. the top eigenvectors of the sample covariance.
    """
    mean = X_train.mean(axis=0)
    _, sv, Vt = np.linalg.svd(X_train - mean, full_matrices=False)
    k = min(dim, int(np.sum(sv > sv[0] * 1e-12)) if sv.size and sv[0] > 0 else 0)
    if k == 0:
        raise ValueError("training features have no variance")
    axes = Vt[:k]
    scale = sv[:k] / np.sqrt(max(X_train.shape[0] - 1, 1))
    return mean, axes, scale


def crossvalidate(X, y, folds=10, pca_dim=50, seed=0, classifier="svm"):
    """Balanced k-fold accuracy of PCA followed by a linear classifier.

    PCA (centring, top ``pca_dim`` axes, unit-variance scores) is fitted on
    each training split only.  ``classifier`` is ``"svm"`` (:class:`LinearSvm`)
    or ``"ridge"``; the ridge classifier also serves as fallback when the SVM
    produces non-finite weights.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError(f"features {X.shape} do not match {y.size} labels")
    if folds < 2:
        raise ValueError(f"folds={folds} must be at least 2")
    if classifier not in ("svm", "ridge"):
        raise ValueError(f"classifier must be 'svm' or 'ridge', got {classifier!r}")
    fold = balanced_folds(y, folds, seed)
    acc = np.empty(folds)
    for k in range(folds):
        train, test = fold != k, fold == k
        mean, axes, scale = _pca(X[train], pca_dim)
        Z_train = (X[train] - mean) @ axes.T / scale
        Z_test = (X[test] - mean) @ axes.T / scale
        model = None
        if classifier == "svm":
            model = LinearSvm(seed=seed + k).fit(Z_train, y[train])
            if not np.all(np.isfinite(model.coef_)):
                log.warning("fold %d: SVM weights not finite, using ridge fallback", k)
                model = None
        if model is None:
            model = RidgeClassifier().fit(Z_train, y[train])
        acc[k] = np.mean(model.predict(Z_test) == y[test])
    return CvResult(float(acc.mean()), float(acc.std()), acc)

"""Command-line front end (``sphereot <subcommand> ...``).

Exit status: 0 on success, 2 on invalid input (bad flags, malformed or
mismatched files), 1 on numerical failure.
"""

import argparse
import logging
import sys

import numpy as np

from . import files
from .geometry import sph
from .harmonic_transforms import semicircle_forward, semicircle_pinv, vslice_forward, vslice_pinv
from .inversion import PdParams, pd_invert
from .pipelines import (
    DatasetSpec,
    FeatureConfig,
    InterpConfig,
    VmfSpec,
    crossvalidate,
    feature_matrix,
    generate_dataset,
    vcdt_interpolate,
    vmf_density,
    wcdt_interpolate,
)
from .quadrature import GridDensity, sphere_grid
from .sliced_distances import SlicedConfig, ssw, vsw

log = logging.getLogger("sphereot")


class UsageError(ValueError):
    pass


def _angles(text, flag):
    try:
        phi, theta = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} expects 'phi,theta' in radians, got {text!r}") from None
    if not 0.0 <= theta <= np.pi:
        raise UsageError(f"{flag}: theta={theta} must lie in [0, pi]")
    return tuple(sph(phi, theta))


def _band_limit(N):
    if N < 1:
        raise UsageError(f"--N={N} must be at least 1")
    return N


def _pd_params(args):
    return PdParams(rho=args.rho, sigma=args.sigma, tau=args.tau, max_iter=args.iters)


def _add_pd_flags(p):
    p.add_argument("--rho", type=float, default=0.1, help="regularization weight (default 0.1)")
    p.add_argument("--sigma", type=float, default=1.0, help="dual step size (default 1)")
    p.add_argument("--tau", type=float, default=0.25, help="primal step size (default 1/4)")
    p.add_argument("--iters", type=int, default=200, help="primal-dual iterations (default 200)")


def _sphere_input(path):
    f = files.read_density(path)
    if f.grid.kind != "sphere":
        raise UsageError(f"{path}: grid={f.grid.kind}, expected sphere")
    return f


# ---------------------------------------------------------------------------
# subcommands


def cmd_transform(args):
    f = _sphere_input(args.input)
    g = vslice_forward(f) if args.op == "v" else semicircle_forward(f, args.G)
    files.write_density(args.output, g)
    log.info("mass in %.12f, mass out %.12f", f.mass(), g.mass())


def cmd_invert(args):
    g = files.read_density(args.input)
    expected = {"v": "cylinder", "w": "so3"}[args.op]
    if g.grid.kind != expected:
        raise UsageError(f"{args.input}: grid={g.grid.kind}, --op {args.op} expects {expected}")
    if args.mode == "pinv":
        if args.trace:
            raise UsageError("--trace needs --mode reg")
        f = vslice_pinv(g) if args.op == "v" else semicircle_pinv(g)
    else:
        res = pd_invert(g, _pd_params(args), transform=args.op)
        f = res.density
        log.info("objective after %d iterations: %.6e", res.iterations, res.objective[-1])
        if args.trace:
            rows = [[k + 1, repr(float(v))] for k, v in enumerate(res.objective)]
            files.write_table(args.trace, ["iteration", "objective"], rows)
    files.write_density(args.output, f)


def cmd_distance(args):
    a = files.read_measure(args.a)
    b = files.read_measure(args.b)
    if isinstance(a, GridDensity) and isinstance(b, GridDensity) and a.grid.N != b.grid.N:
        raise UsageError(f"band-limit mismatch: field N={a.grid.N} in {args.a}, N={b.grid.N} in {args.b}")
    cfg = SlicedConfig(p=args.p, n_psi=args.n_psi, zenith_N=args.zenith_N, slice_points=args.slice_points)
    d = vsw(a, b, cfg) if args.metric == "vsw" else ssw(a, b, cfg)
    print(repr(float(d)))


def cmd_interpolate(args):
    mu = _sphere_input(args.a)
    nu = _sphere_input(args.b)
    if mu.grid.N != nu.grid.N:
        raise UsageError(f"band-limit mismatch: field N={mu.grid.N} in {args.a}, N={nu.grid.N} in {args.b}")
    cfg = InterpConfig(slice_points=args.slice_points, pd=_pd_params(args))
    fn = vcdt_interpolate if args.op == "v" else wcdt_interpolate
    files.write_density(args.output, fn(mu, nu, args.delta, args.mode, cfg))


def cmd_gen_vmf(args):
    etas = [_angles(args.mean, "--mean")] + [_angles(m, "--mix") for m in args.mix]
    if len(etas) == 1:
        spec = VmfSpec(args.kappa, etas[0], symmetrize=args.symmetrize)
    else:
        spec = VmfSpec.equal_mixture(etas, args.kappa, args.symmetrize)
    f = vmf_density(spec, sphere_grid(_band_limit(args.N)), normalize=not args.analytic)
    files.write_density(args.output, f)


def cmd_gen_dataset(args):
    spec = DatasetSpec(args.id, args.n_per_class, args.seed, args.kappa, _band_limit(args.N))
    data = generate_dataset(spec)
    X = np.vstack([f.values for f, _ in data])
    y = np.array([lab for _, lab in data])
    meta = {"grid": "sphere", "N": spec.N, "dataset": spec.id, "seed": spec.seed, "kappa": repr(spec.kappa)}
    files.write_matrix(args.output, X, y, meta)


def cmd_classify(args):
    X, y, meta = files.read_matrix(args.dataset)
    if meta.get("grid") != "sphere" or "N" not in meta:
        raise UsageError(f"{args.dataset}: header must carry grid=sphere and N")
    grid = sphere_grid(int(meta["N"]))
    if X.shape[1] != grid.size:
        raise UsageError(f"{args.dataset}: rows have {X.shape[1]} samples, grid N={grid.N} needs {grid.size}")
    cfg = FeatureConfig(slice_points=args.slice_points)
    F = feature_matrix([GridDensity(grid, row) for row in X], args.features, cfg)
    if args.save_features:
        files.write_matrix(args.save_features, F, y, {"features": args.features, "N": grid.N})
    res = crossvalidate(F, y, args.folds, args.pca, args.seed, args.classifier)
    print(f"{args.features} {res.mean:.3f} {res.std:.3f}")
    if args.table:
        name = meta.get("dataset", "?")
        files.write_table(
            args.table,
            ["dataset", "features", "mean", "std"] + [f"fold{k}" for k in range(args.folds)],
            [[name, args.features, f"{res.mean:.6f}", f"{res.std:.6f}"] + [f"{a:.6f}" for a in res.fold_accuracy]],
        )


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="sphereot", description="Sliced optimal transport on the 2-sphere.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="vertical slice (v) or semicircle (w) transform of a sphere density")
    p.add_argument("--op", choices=("v", "w"), required=True, help="v: vertical slice transform, w: semicircle transform")
    p.add_argument("--G", type=int, default=None, help="gamma grid size for --op w (default 2N+1)")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("invert", help="pseudoinverse or regularized inverse of transform data")
    p.add_argument("--op", "--transform", dest="op", choices=("v", "w"), required=True, help="transform that produced the input")
    p.add_argument("--mode", choices=("pinv", "reg"), default="reg", help="pseudoinverse or KL-regularized inverse (default reg)")
    _add_pd_flags(p)
    p.add_argument("--trace", default=None, help="write the objective per iteration (CSV) to this file")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("distance", help="VSW_p or SSW_p between two densities or atomic measures")
    p.add_argument("--metric", choices=("vsw", "ssw"), required=True, help="vertical (vsw) or semicircular (ssw) sliced distance")
    p.add_argument("--p", type=float, default=2.0, help="Wasserstein exponent (default 2)")
    p.add_argument("--n-psi", type=int, default=64, help="slice directions for VSW (default 64)")
    p.add_argument("--zenith-N", type=int, default=16, help="band-limit of the SSW zenith grid (default 16)")
    p.add_argument("--slice-points", type=int, default=256, help="cells per density slice (default 256)")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("interpolate", help="V-CDT or W-CDT interpolation between two densities")
    p.add_argument("--op", choices=("v", "w"), required=True, help="interpolate vertical (v) or semicircle (w) slices")
    p.add_argument("--delta", type=float, required=True, help="interpolation parameter in [0, 1]")
    p.add_argument("--mode", choices=("pinv", "reg"), default="pinv", help="inverse used to return to the sphere (default pinv)")
    p.add_argument("--slice-points", type=int, default=256, help="cells per slice (default 256)")
    _add_pd_flags(p)
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("output")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("gen-vmf", help="sample a (mixture of) von Mises-Fisher density on a sphere grid")
    p.add_argument("--kappa", type=float, default=50.0, help="concentration (default 50)")
    p.add_argument("--mean", required=True, help="mean direction as 'phi,theta' in radians")
    p.add_argument("--mix", action="append", default=[], help="further mean 'phi,theta' of an equal mixture (repeatable)")
    p.add_argument("--symmetrize", action="store_true", help="average with the mirror image at the equator")
    p.add_argument("--analytic", action="store_true", help="keep the analytic constant instead of rescaling to quadrature mass 1")
    p.add_argument("--N", type=int, default=16, help="band-limit of the sphere grid (default 16)")
    p.add_argument("output")
    p.set_defaults(func=cmd_gen_vmf)

    p = sub.add_parser("gen-dataset", help="labeled vMF dataset as a matrix file")
    p.add_argument("--id", type=int, choices=range(1, 6), required=True, help="dataset rule 1..5")
    p.add_argument("--seed", type=int, default=0, help="random seed of the mean directions (default 0)")
    p.add_argument("--n-per-class", type=int, default=50, help="densities per class (default 50)")
    p.add_argument("--kappa", type=float, default=50.0, help="vMF concentration (default 50)")
    p.add_argument("--N", type=int, default=16, help="band-limit of the sphere grid (default 16)")
    p.add_argument("output")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("classify", help="cross-validated linear classification of a dataset")
    p.add_argument("--features", choices=("raw", "v", "w"), required=True, help="raw samples, V-CDT or W-CDT features")
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds (default 10)")
    p.add_argument("--pca", type=int, default=50, help="PCA dimension (default 50)")
    p.add_argument("--seed", type=int, default=0, help="fold assignment and SVM order seed")
    p.add_argument("--classifier", choices=("svm", "ridge"), default="svm", help="linear classifier (default svm)")
    p.add_argument("--slice-points", type=int, default=256, help="cells per slice (default 256)")
    p.add_argument("--save-features", default=None, help="write the feature matrix to this file")
    p.add_argument("--table", default=None, help="write a result row (CSV) to this file")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_classify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValueError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"sphereot {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"sphereot {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

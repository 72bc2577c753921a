"""Cross-validated classification of the five vMF datasets.

For every dataset and feature type (raw samples, V-CDT, W-CDT) the features
are reduced by PCA and classified by a linear SVM in 10-fold
cross-validation.  The result table has one row per (dataset, features).

    python3 scripts/run_classification.py --out results/classification.csv
"""

import argparse
import logging
import time
from pathlib import Path

import numpy as np

from sphereot import files
from sphereot.pipelines import DatasetSpec, crossvalidate, feature_matrix, generate_dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="results/classification.csv")
    ap.add_argument("--datasets", default="1,2,3,4,5")
    ap.add_argument("--features", default="raw,v,w")
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--n-per-class", type=int, default=50)
    ap.add_argument("--kappa", type=float, default=50.0)
    ap.add_argument("--seed", type=int, default=0, help="seed of the dataset means and the folds")
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--pca", type=int, default=50)
    ap.add_argument("--classifier", choices=("svm", "ridge"), default="svm")
    args = ap.parse_args()
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s %(name)s: %(message)s")

    rows = []
    for did in (int(d) for d in args.datasets.split(",")):
        spec = DatasetSpec(did, args.n_per_class, args.seed, args.kappa, args.N)
        data = generate_dataset(spec)
        y = np.array([lab for _, lab in data])
        for feats in args.features.split(","):
            start = time.perf_counter()
            X = feature_matrix([f for f, _ in data], feats)
            res = crossvalidate(X, y, args.folds, args.pca, args.seed, args.classifier)
            rows.append([did, feats, f"{res.mean:.3f}", f"{res.std:.3f}", X.shape[1], f"{time.perf_counter() - start:.1f}"])
            print(f"dataset {did} ({' vs '.join(spec.classes)}): {feats:>3} {res}", flush=True)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    files.write_table(args.out, ["dataset", "features", "mean", "std", "dim", "seconds"], rows)


if __name__ == "__main__":
    main()

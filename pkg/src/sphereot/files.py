"""Plain-text file formats.

Densities::

    # grid=sphere N=16            (or grid=cylinder N=.., grid=so3 N=.. G=..)
    value
    <one sample per line, in the index order of the grid>

Atomic measures on the sphere::

    # atoms
    x,y,z,mass

Feature / dataset matrices: ``# key=value ...`` header, then one
comma-separated row per sample whose last column is the integer label.

Floats are written with ``repr`` so that files round-trip exactly and equal
inputs give byte-identical outputs.
"""

import csv

import numpy as np

from .harmonic_transforms import DiscreteMeasureS2
from .quadrature import GridDensity, cylinder_grid, so3_grid, sphere_grid

__all__ = [
    "write_density",
    "read_density",
    "write_atoms",
    "read_atoms",
    "read_measure",
    "write_matrix",
    "read_matrix",
    "write_table",
    "parse_header",
]


def parse_header(line, path="<input>"):
    if not line.startswith("#"):
        raise ValueError(f"{path}: first line must be a '# key=value' header")
    out = {}
    for tok in line[1:].split():
        key, sep, val = tok.partition("=")
        out[key] = val if sep else True
    return out


def _int_field(meta, key, path):
    if key not in meta:
        raise ValueError(f"{path}: header is missing field {key}")
    try:
        return int(meta[key])
    except ValueError:
        raise ValueError(f"{path}: header field {key}={meta[key]!r} is not an integer") from None


def _grid_from_header(meta, path):
    kind = meta.get("grid")
    N = _int_field(meta, "N", path)
    if N < 0:
        raise ValueError(f"{path}: header field N={N} must be nonnegative")
    if kind == "sphere":
        return sphere_grid(N)
    if kind == "cylinder":
        return cylinder_grid(N)
    if kind == "so3":
        return so3_grid(N, _int_field(meta, "G", path))
    raise ValueError(f"{path}: header field grid={kind!r} must be sphere, cylinder or so3")


def _header(grid):
    head = f"# grid={grid.kind} N={grid.N}"
    if grid.kind == "so3":
        head += f" G={grid.G}"
    return head


def write_density(path, g):
    lines = [_header(g.grid), "value"]
    lines += [repr(float(v)) for v in g.values]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_lines(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: file is empty")
    return lines


def read_density(path):
    """Read a density file and validate it against its grid header."""
    lines = _read_lines(path)
    meta = parse_header(lines[0], path)
    grid = _grid_from_header(meta, path)
    if len(lines) < 2 or lines[1] != "value":
        raise ValueError(f"{path}: second line must be the column name 'value'")
    try:
        values = np.array([float(v) for v in lines[2:]])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed value ({exc})") from None
    if values.size != grid.size:
        raise ValueError(f"{path}: field value has {values.size} rows, grid {grid.kind} N={grid.N} needs {grid.size}")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: field value contains non-finite entries")
    return GridDensity(grid, values)


def write_atoms(path, mu):
    lines = ["# atoms", "x,y,z,mass"]
    for p, m in zip(mu.points, mu.masses):
        lines.append(",".join(repr(float(v)) for v in (*p, m)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_atoms(path):
    lines = _read_lines(path)
    meta = parse_header(lines[0], path)
    if "atoms" not in meta:
        raise ValueError(f"{path}: header must be '# atoms'")
    if len(lines) < 3 or lines[1].replace(" ", "") != "x,y,z,mass":
        raise ValueError(f"{path}: expected columns x,y,z,mass and at least one atom")
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed atom row ({exc})") from None
    if data.ndim != 2 or data.shape[1] != 4:
        raise ValueError(f"{path}: atom rows must have 4 columns")
    return DiscreteMeasureS2(data[:, :3], data[:, 3])


def read_measure(path):
    """A density or an atomic measure, depending on the header."""
    with open(path) as fh:
        first = fh.readline().strip()
    meta = parse_header(first, path)
    return read_atoms(path) if "atoms" in meta else read_density(path)


def write_matrix(path, X, y, meta):
    """Rows of ``X`` followed by the label column; ``meta`` goes to the header."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    head = "# " + " ".join(f"{k}={v}" for k, v in meta.items())
    lines = [head]
    for row, lab in zip(X, y):
        lines.append(",".join(repr(float(v)) for v in row) + f",{lab}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path):
    """Return ``(X, y, meta)`` from :func:`write_matrix` output."""
    lines = _read_lines(path)
    meta = parse_header(lines[0], path)
    rows = [ln.split(",") for ln in lines[1:]]
    if not rows:
        raise ValueError(f"{path}: no sample rows")
    width = len(rows[0])
    if width < 2 or any(len(r) != width for r in rows):
        raise ValueError(f"{path}: rows must all have the same number (>= 2) of columns")
    try:
        X = np.array([[float(v) for v in r[:-1]] for r in rows])
        y = np.array([int(r[-1]) for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    return X, y, meta


def write_table(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)

"""CSV output and input. Floats are written with 17 significant digits so that
every value parses back to the identical double; lines end in LF."""

import csv
import os
from pathlib import Path

import numpy as np

from . import spectral
from .continuation import BranchPoint, BranchRecord
from .model import PeriodicProfile

BRANCH_COLUMNS = ("s", "M", "K", "min_h", "max_h", "l2_norm", "h2_norm", "flux_residual",
                  "leading_eig")
OUTPUT_DIR_ENV = "THINFILM_OUTPUT_DIR"


def fmt(value):
    if isinstance(value, (str, bool, np.bool_)):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "%.17g" % float(value)


def write_csv(path, header, rows):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (header, float array of shape (rows, columns))."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader if row]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def resolve_output_dir(flag=None, configured=None):
    """Output directory: explicit flag, then the environment, then the config."""
    chosen = flag or os.environ.get(OUTPUT_DIR_ENV) or configured or "."
    path = Path(chosen)
    path.mkdir(parents=True, exist_ok=True)
    return path


def profile_rows(profile, n=None):
    x, v = profile.sample(n)
    return zip(x, v, 1.0 + v)


def write_profile(path, profile, n=None):
    return write_csv(path, ("x", "v", "h"), profile_rows(profile, n))


def read_profile(path, k0=None):
    """Rebuild a PeriodicProfile from an x,v,h file written on the default grid."""
    header, data = read_csv(path)
    if tuple(header) != ("x", "v", "h"):
        raise ValueError(f"{path}: unexpected header {header}")
    x, v = data[:, 0], data[:, 1]
    n = x.size
    k0 = np.pi / -x[0] if k0 is None else k0
    N = max(n // 8, 1)
    return PeriodicProfile(k0, spectral.cosine_coefficients(v, N)), data


def emit_branch(record, directory):
    """Write branch.csv, profile_<idx>.csv and bifurcation_diagram.csv."""
    if not record.points:
        raise ValueError("cannot emit an empty branch record")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = [[getattr(p, c) for c in BRANCH_COLUMNS] for p in record.points]
    paths = [write_csv(directory / "branch.csv", BRANCH_COLUMNS, rows)]
    for idx, point in enumerate(record.points):
        paths.append(write_profile(directory / f"profile_{idx}.csv", point.profile))
    order = np.argsort([p.s for p in record.points], kind="stable")
    diagram = [(record[i].M, record[i].l2_norm) for i in order]
    paths.append(write_csv(directory / "bifurcation_diagram.csv", ("M", "l2_norm"), diagram))
    return paths


def read_branch(directory, k0=None, g=1.0):
    """Inverse of `emit_branch`. Scalar columns are restored bit-exactly;
    profiles are re-projected from their samples."""
    directory = Path(directory)
    header, data = read_csv(directory / "branch.csv")
    if tuple(header) != BRANCH_COLUMNS:
        raise ValueError(f"unexpected branch header {header}")
    points = []
    for idx, row in enumerate(data):
        profile, _ = read_profile(directory / f"profile_{idx}.csv", k0)
        values = dict(zip(BRANCH_COLUMNS, (float(v) for v in row)))
        values["amplitude"] = float(profile.coeffs[0])
        points.append(BranchPoint(profile=profile, **values))
    k0 = points[0].profile.k0 if points else (1.0 if k0 is None else k0)
    return BranchRecord(points, "user-bound", g, k0)

"""CSV import/export for graphs and signal matrices.

Two graph formats are supported: an edge list with a `src,dst,weight`
header (every stored nonzero entry appears as one row) and a headerless
dense matrix. Floats are written with 17 significant digits so that
round trips are exact.
"""

from __future__ import annotations

import csv

import numpy as np

from .graphs import Gso, GsoFamily

_FMT = "%.17g"


def save_edgelist(gso: Gso, path) -> None:
    """Write every nonzero entry of the GSO as a `src,dst,weight` row."""
    m = gso.matrix
    rows, cols = np.nonzero(m)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        for i, j in zip(rows.tolist(), cols.tolist()):
            writer.writerow([i, j, _FMT % m[i, j]])


def load_edgelist(
    path,
    n: int | None = None,
    family: GsoFamily = GsoFamily.ADJACENCY,
    symmetric: bool | None = None,
) -> Gso:
    """Read an edge-list CSV back into a Gso.

    The node count defaults to max(src, dst) + 1; pass `n` explicitly
    if trailing nodes are isolated. The symmetry flag is detected from
    the data unless given.
    """
    src, dst, w = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header[:3]] != ["src", "dst", "weight"]:
            raise ValueError(f"not an edge-list CSV (header {header!r})")
        for row in reader:
            if not row:
                continue
            src.append(int(row[0]))
            dst.append(int(row[1]))
            w.append(float(row[2]))
    if n is None:
        if not src:
            raise ValueError("empty edge list and no node count given")
        n = max(max(src), max(dst)) + 1
    a = np.zeros((n, n))
    a[src, dst] = w
    if symmetric is None:
        symmetric = bool(np.array_equal(a, a.T))
    return Gso(a, family, symmetric)


def save_dense(matrix, path) -> None:
    """Write a dense matrix (or a Gso's matrix) as headerless CSV."""
    m = getattr(matrix, "matrix", matrix)
    np.savetxt(path, np.asarray(m, dtype=float), fmt=_FMT, delimiter=",")


def load_dense(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def load_graph(
    path,
    n: int | None = None,
    family: GsoFamily = GsoFamily.ADJACENCY,
    symmetric: bool | None = None,
) -> Gso:
    """Load a graph CSV, sniffing edge-list vs dense format."""
    with open(path) as fh:
        first = fh.readline()
    if first.lower().startswith("src"):
        return load_edgelist(path, n=n, family=family, symmetric=symmetric)
    m = load_dense(path)
    if symmetric is None:
        symmetric = bool(np.array_equal(m, m.T))
    return Gso(m, family, symmetric)


def save_signals(signals: np.ndarray, path) -> None:
    """Write a signal matrix: one row per node, one column per signal."""
    signals = np.asarray(signals, dtype=float)
    assert signals.ndim == 2
    header = ",".join(f"s{j}" for j in range(signals.shape[1]))
    np.savetxt(path, signals, fmt=_FMT, delimiter=",", header=header, comments="")


def load_signals(path) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline()
    skip = 1 if first and first.lstrip()[:1] == "s" else 0
    return np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)

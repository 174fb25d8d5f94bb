"""Graph-shift operators, random graphs, perturbations, filters and signals.

Everything here is deliberately dense-matrix based: the solvers in this
package operate on graphs with a few hundred nodes at most, where dense
linear algebra is both simpler and faster than sparse bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Tolerances used by the type invariants.
SYM_TOL = 1e-12
ROWSUM_TOL = 1e-10
RECON_TOL = 1e-8
FILTER_TOL = 1e-8

_MAX_GRAPH_RETRIES = 100


class GsoFamily(Enum):
    """Structural family of a graph-shift operator."""

    ADJACENCY = "adjacency"
    COMBINATORIAL_LAPLACIAN = "combinatorial_laplacian"


class PerturbationKind(Enum):
    """Supported topology/weight perturbation models."""

    CREATE = "create"
    DESTROY = "destroy"
    CREATE_DESTROY = "create_destroy"
    WEIGHT_NOISE = "weight_noise"
    MIXED = "mixed"


class InputDist(Enum):
    """Distributions available for synthesizing input signals."""

    GAUSSIAN_WHITE = "gaussian_white"


# ---------------------------------------------------------------- #
#                           domain types                           #
# ---------------------------------------------------------------- #


@dataclass(frozen=True)
class Gso:
    """A graph-shift operator: dense matrix plus structural metadata.

    Parameters
    ----------
    matrix : ndarray, shape (n, n)
        The shift-operator matrix.
    family : GsoFamily
        Structural family. Adjacency matrices must have a zero diagonal
        and nonnegative entries; combinatorial Laplacians must have
        nonpositive off-diagonal entries and zero row sums.
    symmetric : bool
        Whether the matrix is (and must remain) symmetric.

    The matrix is frozen (made read-only) on construction, so instances
    are safe to share across threads.
    """

    matrix: np.ndarray
    family: GsoFamily = GsoFamily.ADJACENCY
    symmetric: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"GSO matrix must be square, got shape {m.shape}")
        if self.family is GsoFamily.ADJACENCY:
            if np.any(np.diag(m) != 0.0):
                raise ValueError("adjacency GSO must have an exactly zero diagonal")
            if np.any(m < 0.0):
                raise ValueError("adjacency GSO must be entrywise nonnegative")
        elif self.family is GsoFamily.COMBINATORIAL_LAPLACIAN:
            off = m - np.diag(np.diag(m))
            if np.any(off > 0.0):
                raise ValueError("Laplacian GSO must have nonpositive off-diagonal entries")
            if np.max(np.abs(m.sum(axis=1))) > ROWSUM_TOL:
                raise ValueError("Laplacian GSO rows must sum to zero")
        if self.symmetric and np.max(np.abs(m - m.T)) > SYM_TOL:
            raise ValueError("GSO marked symmetric but matrix is not")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        """Number of nodes."""
        return self.matrix.shape[0]


@dataclass(frozen=True)
class SpectralDecomp:
    """Eigendecomposition of a GSO: S = V diag(eigvals) V^{-1}."""

    eigvecs: np.ndarray
    eigvals: np.ndarray
    inv_eigvecs: np.ndarray

    def vandermonde(self, order: int | None = None) -> np.ndarray:
        """Vandermonde matrix of the eigenvalues, Psi[i, j] = eigvals[i]**j.

        `order` truncates the number of columns (defaults to n).
        """
        n = self.eigvals.shape[0]
        order = n if order is None else order
        assert 1 <= order <= n, "filter order must be in [1, n]"
        return np.vander(self.eigvals, order, increasing=True)


def spectral_decomp(gso: Gso) -> SpectralDecomp:
    """Diagonalize a GSO, using the symmetric solver when applicable.

    Raises
    ------
    numpy.linalg.LinAlgError
        If the decomposition does not reconstruct the matrix to within
        a 1e-8 relative Frobenius error (defective or near-defective S).
    """
    s = gso.matrix
    if gso.symmetric:
        eigvals, v = np.linalg.eigh(s)
        v_inv = v.T.copy()
    else:
        eigvals, v = np.linalg.eig(s)
        v_inv = np.linalg.inv(v)
    recon = (v * eigvals) @ v_inv
    scale = max(np.linalg.norm(s), 1e-300)
    rel = np.linalg.norm(recon - s) / scale
    if rel > RECON_TOL:
        raise np.linalg.LinAlgError(
            f"eigendecomposition reconstruction error {rel:.2e} exceeds {RECON_TOL:.0e}"
        )
    return SpectralDecomp(eigvecs=v, eigvals=eigvals, inv_eigvecs=v_inv)


@dataclass(frozen=True)
class GraphFilter:
    """A polynomial graph filter, as coefficients and/or a dense matrix."""

    coeffs: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.coeffs is None and self.matrix is None:
            raise ValueError("GraphFilter needs coefficients, a matrix, or both")

    def validate_against(self, gso: Gso) -> float:
        """Relative mismatch between the two representations on `gso`.

        Returns ||H - sum_r h_r S^r||_F / ||H||_F; raises if either
        representation is missing or the mismatch exceeds 1e-8.
        """
        assert self.coeffs is not None and self.matrix is not None
        rebuilt = build_filter(gso, self.coeffs).matrix
        scale = max(np.linalg.norm(self.matrix), 1e-300)
        rel = np.linalg.norm(self.matrix - rebuilt) / scale
        if rel > FILTER_TOL:
            raise ValueError(f"filter representations disagree: rel error {rel:.2e}")
        return rel


@dataclass(frozen=True)
class PerturbationSpec:
    """How to perturb a GSO into an imperfect observation of itself.

    ratio is the fraction of existing links affected; weight_sigma is
    the standard deviation used by the weight-noise models.
    """

    kind: PerturbationKind
    ratio: float = 0.1
    weight_sigma: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise ValueError(f"ratio must be in [0, 1], got {self.ratio}")
        if self.weight_sigma < 0.0:
            raise ValueError("weight_sigma must be nonnegative")


@dataclass(frozen=True)
class SignalSet:
    """Paired input/output signal matrices, one column per signal."""

    x: np.ndarray
    y: np.ndarray
    noise_power: float = 0.0

    def __post_init__(self):
        if self.x.shape != self.y.shape:
            raise ValueError(f"X and Y must share dimensions, got {self.x.shape} vs {self.y.shape}")


# ---------------------------------------------------------------- #
#                         graph generation                         #
# ---------------------------------------------------------------- #


def generate_er(n: int, p: float, symmetric: bool = True, seed=None) -> Gso:
    """Sample an Erdos-Renyi adjacency matrix without all-zero rows.

    Parameters
    ----------
    n : int
        Number of nodes (at least 2).
    p : float
        Independent link probability, strictly inside (0, 1).
    symmetric : bool
        Sample an undirected graph (upper triangle mirrored) when True,
        otherwise every off-diagonal entry independently.
    seed : int, Generator or None
        RNG seed or generator.

    Returns
    -------
    Gso
        Adjacency-family GSO.

    Raises
    ------
    RuntimeError
        If 100 attempts in a row produce a graph with an isolated row
        (p too small for the requested size).
    """
    assert n >= 2, "need at least 2 nodes"
    assert 0.0 < p < 1.0, "p must be in (0, 1)"
    rng = np.random.default_rng(seed)
    for _ in range(_MAX_GRAPH_RETRIES):
        if symmetric:
            upper = np.triu(rng.random((n, n)) < p, k=1)
            a = (upper | upper.T).astype(float)
        else:
            a = (rng.random((n, n)) < p).astype(float)
            np.fill_diagonal(a, 0.0)
        if np.all(a.sum(axis=1) > 0):
            return Gso(a, GsoFamily.ADJACENCY, symmetric)
    raise RuntimeError(
        f"no row-complete ER graph after {_MAX_GRAPH_RETRIES} tries (n={n}, p={p}); increase p"
    )


def generate_small_world(n: int, k: int, rewire_p: float, seed=None) -> Gso:
    """Sample a Watts-Strogatz small-world adjacency matrix.

    Starts from a ring lattice where every node links to its k nearest
    neighbors (k/2 per side) and rewires each lattice edge with
    probability `rewire_p` to a uniformly random non-duplicate target.
    Rewiring preserves the total edge count.
    """
    if k % 2 != 0 or not 0 < k < n:
        raise ValueError(f"k must be even and in (0, n), got k={k}, n={n}")
    assert 0.0 <= rewire_p <= 1.0
    rng = np.random.default_rng(seed)
    a = np.zeros((n, n))
    for j in range(1, k // 2 + 1):
        for i in range(n):
            a[i, (i + j) % n] = 1.0
            a[(i + j) % n, i] = 1.0
    for j in range(1, k // 2 + 1):
        for i in range(n):
            if a[i, (i + j) % n] == 0.0:
                continue  # already rewired away
            if rng.random() >= rewire_p:
                continue
            old = (i + j) % n
            candidates = np.flatnonzero(a[i] == 0.0)
            candidates = candidates[candidates != i]
            if candidates.size == 0:
                continue
            new = candidates[rng.integers(candidates.size)]
            a[i, old] = a[old, i] = 0.0
            a[i, new] = a[new, i] = 1.0
    return Gso(a, GsoFamily.ADJACENCY, symmetric=True)


# ---------------------------------------------------------------- #
#                           perturbation                           #
# ---------------------------------------------------------------- #


def _link_indices(a: np.ndarray, symmetric: bool):
    """Index arrays of present and absent links (upper triangle if symmetric)."""
    n = a.shape[0]
    if symmetric:
        iu, ju = np.triu_indices(n, k=1)
    else:
        iu, ju = np.where(~np.eye(n, dtype=bool))
    vals = a[iu, ju]
    present = vals != 0.0
    return iu, ju, present


def perturb(gso: Gso, spec: PerturbationSpec) -> Gso:
    """Return a perturbed copy of `gso` according to `spec`.

    Link creations place new weights only where the graph has none,
    drawn from the empirical distribution of existing weights;
    destructions zero out existing links. The create/destroy model
    splits the budget evenly, rounding creations down. Weight noise
    adds N(0, sigma^2) to a fraction `ratio` of the existing links,
    clipped at zero so the result remains an adjacency matrix.
    Symmetric graphs are perturbed symmetrically.

    Raises
    ------
    ValueError
        If the requested ratio demands more creations or destructions
        than the graph can accommodate, or the family is not adjacency.
    """
    if gso.family is not GsoFamily.ADJACENCY:
        raise ValueError("perturbation models are defined for adjacency GSOs only")
    rng = np.random.default_rng(spec.seed)
    a = gso.matrix.copy()
    iu, ju, present = _link_indices(a, gso.symmetric)
    n_links = int(present.sum())
    n_absent = int((~present).sum())

    def _set(idx_mask_positions, values):
        rows, cols = iu[idx_mask_positions], ju[idx_mask_positions]
        a[rows, cols] = values
        if gso.symmetric:
            a[cols, rows] = values

    def _create(count):
        if count == 0:
            return
        if n_absent == 0:
            raise ValueError("no absent links available for creation")
        if count > n_absent:
            raise ValueError(f"cannot create {count} links, only {n_absent} absent")
        pool = np.flatnonzero(~present)
        chosen = rng.choice(pool, size=count, replace=False)
        weights = a[iu[present], ju[present]]
        new_w = rng.choice(weights, size=count, replace=True) if weights.size else np.ones(count)
        _set(chosen, new_w)

    def _destroy(count):
        if count == 0:
            return
        if n_links == 0:
            raise ValueError("no existing links available for destruction")
        if count > n_links:
            raise ValueError(f"cannot destroy {count} links, only {n_links} present")
        pool = np.flatnonzero(present)
        chosen = rng.choice(pool, size=count, replace=False)
        _set(chosen, 0.0)

    def _weight_noise(count, sigma):
        if count == 0 or sigma == 0.0:
            return
        pool = np.flatnonzero(present)
        chosen = rng.choice(pool, size=count, replace=False)
        noisy = a[iu[chosen], ju[chosen]] + sigma * rng.standard_normal(count)
        _set(chosen, np.maximum(noisy, 0.0))

    budget = int(round(spec.ratio * n_links))
    if spec.kind is PerturbationKind.CREATE:
        if n_absent == 0:
            raise ValueError("no absent links available for creation")
        _create(budget)
    elif spec.kind is PerturbationKind.DESTROY:
        if n_links == 0:
            raise ValueError("no existing links available for destruction")
        _destroy(budget)
    elif spec.kind is PerturbationKind.CREATE_DESTROY:
        _create(budget // 2)
        _destroy(budget - budget // 2)
    elif spec.kind is PerturbationKind.WEIGHT_NOISE:
        _weight_noise(budget, spec.weight_sigma)
    elif spec.kind is PerturbationKind.MIXED:
        # link flips plus weight noise on the surviving original links
        _create(budget // 2)
        _destroy(budget - budget // 2)
        iu2, ju2, present2 = _link_indices(a, gso.symmetric)
        survived = present & present2
        pool = np.flatnonzero(survived)
        if pool.size and spec.weight_sigma > 0.0:
            noisy = a[iu2[pool], ju2[pool]] + spec.weight_sigma * rng.standard_normal(pool.size)
            rows, cols = iu2[pool], ju2[pool]
            vals = np.maximum(noisy, 0.0)
            a[rows, cols] = vals
            if gso.symmetric:
                a[cols, rows] = vals
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown perturbation kind {spec.kind}")
    return Gso(a, gso.family, gso.symmetric)


# ---------------------------------------------------------------- #
#                        filters and signals                       #
# ---------------------------------------------------------------- #


def build_filter(gso: Gso, h) -> GraphFilter:
    """Build H = sum_r h[r] S^r by Horner iteration.

    Horner evaluation avoids forming explicit high matrix powers,
    which accumulate error quickly for graphs with large spectral
    radius.
    """
    h = np.asarray(h, dtype=float)
    assert h.ndim == 1 and 1 <= h.size <= gso.n, "need 1 <= len(h) <= n coefficients"
    s = gso.matrix
    eye = np.eye(gso.n)
    acc = h[-1] * eye
    for r in range(h.size - 2, -1, -1):
        acc = acc @ s + h[r] * eye
    return GraphFilter(coeffs=h.copy(), matrix=acc)


def synthesize_signals(
    filt: GraphFilter,
    m: int,
    noise_power: float = 0.0,
    input_dist: InputDist = InputDist.GAUSSIAN_WHITE,
    seed=None,
) -> SignalSet:
    """Draw white inputs and filter them: Y = H X + W.

    The noise W is white Gaussian rescaled so that the realized energy
    ratio ||W||_F^2 / ||H X||_F^2 equals `noise_power` exactly.
    """
    assert filt.matrix is not None, "filter must carry its matrix form"
    assert input_dist is InputDist.GAUSSIAN_WHITE
    assert m >= 1 and noise_power >= 0.0
    rng = np.random.default_rng(seed)
    h = filt.matrix
    n = h.shape[0]
    x = rng.standard_normal((n, m))
    y = h @ x
    if noise_power > 0.0:
        w = rng.standard_normal((n, m))
        w *= np.sqrt(noise_power) * np.linalg.norm(y) / np.linalg.norm(w)
        y = y + w
    return SignalSet(x=x, y=y, noise_power=noise_power)


# ---------------------------------------------------------------- #
#                              metrics                             #
# ---------------------------------------------------------------- #


def nerr(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Normalized squared error ||est - truth||_F^2 / ||truth||_F^2."""
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    denom = np.linalg.norm(truth) ** 2
    if denom == 0.0:
        raise ValueError("nerr undefined for zero-norm truth")
    return float(np.linalg.norm(estimate - truth) ** 2 / denom)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    """Frobenius norm of the commutator AB - BA."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    assert a.shape == b.shape and a.ndim == 2 and a.shape[0] == a.shape[1]
    return float(np.linalg.norm(a @ b - b @ a))


def sample_covariance(signals: np.ndarray) -> np.ndarray:
    """Sample covariance (1/M) X X^T of zero-mean column signals."""
    signals = np.asarray(signals, dtype=float)
    assert signals.ndim == 2 and signals.shape[1] >= 1
    return signals @ signals.T / signals.shape[1]

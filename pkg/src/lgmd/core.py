"""Shared numerical data types, normalization utilities and graph construction.

Everything here is a pure function over immutable-by-convention numpy arrays;
the dataclasses are thin validated containers used throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, NotPositiveDefinite, ZeroVariance

Edge = tuple[int, int]


def support_of(theta: np.ndarray) -> frozenset[Edge]:
    """Set of undirected edges (i, j), i < j, with a nonzero off-diagonal entry."""
    d = theta.shape[0]
    iu, ju = np.triu_indices(d, k=1)
    nz = theta[iu, ju] != 0.0
    return frozenset(zip(iu[nz].tolist(), ju[nz].tolist()))


@dataclass
class DataMatrix:
    """Dense real observation matrix with an optional observation mask.

    Parameters
    ----------
    values : ndarray, shape (n, p)
        Observed data. Entries under a False mask may hold anything; they are
        never read by the fitting code.
    mask : ndarray of bool, shape (n, p), optional
        True marks an observed entry. ``None`` means fully observed.
    """

    values: np.ndarray
    mask: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.values.shape:
                raise ValueError("mask shape %s != values shape %s"
                                 % (self.mask.shape, self.values.shape))
            observed = self.values[self.mask]
        else:
            observed = self.values
        if not np.all(np.isfinite(observed)):
            raise ValueError("observed entries must be finite")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def observed_values(self) -> np.ndarray:
        """values with unobserved entries zeroed (fully observed -> copy)."""
        if self.mask is None:
            return self.values.copy()
        return np.where(self.mask, self.values, 0.0)

    def observed_fraction(self) -> float:
        if self.mask is None:
            return 1.0
        return float(self.mask.mean())


@dataclass
class FactorPair:
    """Low-rank factors x (n x k) and w (p x k) plus their normalization scales.

    The scales record the most recent entry-wise standard deviations used to
    normalize the factors before graph estimation.
    """

    x: np.ndarray
    w: np.ndarray
    x_scale: float = 1.0
    w_scale: float = 1.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if self.x.ndim != 2 or self.w.ndim != 2:
            raise ValueError("factors must be 2-D")
        if self.x.shape[1] != self.w.shape[1]:
            raise ValueError("factors must share the same rank")
        if self.x.shape[1] < 1:
            raise ValueError("rank must be >= 1")
        for name, s in (("x_scale", self.x_scale), ("w_scale", self.w_scale)):
            if not (np.isfinite(s) and s > 0):
                raise ValueError("%s must be a positive finite real" % name)

    @property
    def rank(self) -> int:
        return self.x.shape[1]

    def product(self) -> np.ndarray:
        return self.x @ self.w.T

    def copy(self) -> "FactorPair":
        return FactorPair(self.x.copy(), self.w.copy(), self.x_scale, self.w_scale)


@dataclass
class PrecisionGraph:
    """Symmetric positive-definite precision matrix with explicit edge support."""

    theta: np.ndarray
    support: frozenset[Edge] = None  # type: ignore[assignment]

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        d = self.theta.shape[0]
        if self.theta.ndim != 2 or self.theta.shape[1] != d:
            raise ValueError("theta must be square")
        asym = np.abs(self.theta - self.theta.T).max(initial=0.0)
        scale = max(np.abs(self.theta).max(initial=0.0), 1.0)
        if asym > 1e-12 * scale:
            raise ValueError("theta is not symmetric (relative asymmetry %.3e)"
                             % (asym / scale))
        derived = support_of(self.theta)
        if self.support is None:
            self.support = derived
        else:
            self.support = frozenset(self.support)
            if self.support != derived:
                raise ValueError("support does not match nonzero off-diagonals")

    @property
    def dim(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def identity(cls, d: int) -> "PrecisionGraph":
        return cls(np.eye(d))

    def cholesky(self) -> np.ndarray:
        """Lower Cholesky factor; raises NotPositiveDefinite on failure."""
        try:
            return np.linalg.cholesky(self.theta)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("precision matrix is not PD") from exc

    def logdet(self) -> float:
        chol = self.cholesky()
        return 2.0 * float(np.sum(np.log(np.diag(chol))))


@dataclass
class LaplacianGraph:
    """Combinatorial graph Laplacian with non-negative edge weights."""

    lap: np.ndarray
    weights: dict[Edge, float] = field(default_factory=dict)

    def __post_init__(self):
        self.lap = np.asarray(self.lap, dtype=float)
        d = self.lap.shape[0]
        if self.lap.ndim != 2 or self.lap.shape[1] != d:
            raise ValueError("lap must be square")
        if np.abs(self.lap.sum(axis=1)).max(initial=0.0) > 1e-10:
            raise ValueError("Laplacian rows must sum to zero")
        off = self.lap - np.diag(np.diag(self.lap))
        if off.max(initial=0.0) > 1e-12:
            raise ValueError("off-diagonal Laplacian entries must be <= 0")
        if np.diag(self.lap).min(initial=0.0) < -1e-12:
            raise ValueError("diagonal Laplacian entries must be >= 0")

    @property
    def dim(self) -> int:
        return self.lap.shape[0]

    @classmethod
    def from_weights(cls, d: int, weights: dict[Edge, float]) -> "LaplacianGraph":
        """Build L = sum_e w_e b_e b_e^T from non-negative edge weights."""
        lap = np.zeros((d, d))
        kept = {}
        for (i, j), w in weights.items():
            if w < 0:
                raise ValueError("edge weights must be non-negative")
            if w == 0.0:
                continue
            if not (0 <= i < j < d):
                raise ValueError("edge (%d, %d) out of range for d=%d" % (i, j, d))
            lap[i, i] += w
            lap[j, j] += w
            lap[i, j] -= w
            lap[j, i] -= w
            kept[(i, j)] = float(w)
        return cls(lap, kept)

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.weights)


@dataclass
class Hyperparams:
    """Fit hyperparameters.

    ``lambda1``/``lambda2`` weigh the sample/feature graph penalties and
    ``eta1``/``eta2`` are the objective-level sparsity constants (the
    estimation threshold is eta/k). ``epsilon`` and ``jitter`` are relative
    ridge coefficients: the ALS ridge is epsilon * mean-diagonal of the Gram
    matrix and the covariance jitter is jitter * trace(S)/d.
    """

    k: int
    lambda1: float = 0.1
    lambda2: float = 0.1
    eta1: float = 1.0
    eta2: float = 1.0
    epsilon: float = 1e-8
    jitter: float = 1e-6
    max_outer: int = 50
    max_inner: int = 100
    tol_outer: float = 1e-5
    tol_inner: float = 1e-6

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("rank k must be a positive integer")
        for name in ("lambda1", "lambda2", "eta1", "eta2", "jitter"):
            if getattr(self, name) < 0:
                raise ValueError("%s must be non-negative" % name)
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be positive")
        if not (self.tol_outer > 0 and self.tol_inner > 0):
            raise ValueError("tolerances must be strictly positive")

    def check_rank(self, y: DataMatrix) -> None:
        n, p = y.shape
        if self.k > min(n, p):
            raise ValueError("rank k=%d exceeds min(n, p)=%d" % (self.k, min(n, p)))


def normalize_factor(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Divide a matrix by the standard deviation of all its entries.

    Returns ``(m / s, s)`` where ``s = std(m)`` over every entry, so the
    output has unit entry-wise standard deviation.

    Raises
    ------
    ZeroVariance
        If the entry-wise standard deviation is below 1e-15.
    """
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("input must be finite")
    s = float(np.std(m))
    if s < 1e-15:
        raise ZeroVariance("matrix has (numerically) zero entry-wise std")
    return m / s, s


def normalize_precision(g: PrecisionGraph) -> PrecisionGraph:
    """Rescale a precision graph so that its mean diagonal entry equals one.

    A positive rescaling preserves the support, the sign pattern and positive
    definiteness.
    """
    mean_diag = float(np.mean(np.diag(g.theta)))
    if mean_diag <= 0:
        raise NotPositiveDefinite("precision diagonal must have positive mean")
    return PrecisionGraph(g.theta / mean_diag, g.support)


def _pairwise_masked_sq_dists(pts: np.ndarray, obs: np.ndarray | None) -> np.ndarray:
    """Squared Euclidean distances between rows, restricted to mutually
    observed coordinates when a mask is given. Pairs with no common
    coordinate get +inf."""
    if obs is None:
        sq = np.sum(pts ** 2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
        return np.maximum(d2, 0.0)
    if not np.all(obs.any(axis=1)):
        raise DegenerateInput("a row/column has no observed entries")
    z = np.where(obs, pts, 0.0)
    o = obs.astype(float)
    # sum over common coords of (a_i - b_i)^2, expanded into three products
    cross = z @ z.T
    a2 = (z ** 2) @ o.T
    d2 = a2 + a2.T - 2.0 * cross
    common = o @ o.T
    d2 = np.where(common > 0, np.maximum(d2, 0.0), np.inf)
    return d2


def knn_graph(y: DataMatrix, num_neighbors: int, axis: str = "rows") -> LaplacianGraph:
    """Build a symmetric binary k-nearest-neighbor graph Laplacian.

    Rows (or columns) are points; each point marks its ``num_neighbors``
    nearest others by Euclidean distance (all ties at the cutoff distance are
    included) and the adjacency is the union-symmetrized result, L = D - G.
    For masked data, distances use mutually observed coordinates only.

    Raises
    ------
    DegenerateInput
        If a point has no observed entries.
    """
    if axis not in ("rows", "columns"):
        raise ValueError("axis must be 'rows' or 'columns'")
    pts = y.values if axis == "rows" else y.values.T
    obs = None
    if y.mask is not None:
        obs = y.mask if axis == "rows" else y.mask.T
    d = pts.shape[0]
    if not (1 <= num_neighbors < d):
        raise ValueError("need 1 <= num_neighbors < %d" % d)
    d2 = _pairwise_masked_sq_dists(pts, obs)
    np.fill_diagonal(d2, np.inf)
    adj = np.zeros((d, d), dtype=bool)
    for i in range(d):
        row = d2[i]
        finite = np.isfinite(row)
        if finite.sum() == 0:
            raise DegenerateInput("point %d has no comparable partner" % i)
        kth = np.partition(row[finite], min(num_neighbors, finite.sum()) - 1)[
            min(num_neighbors, finite.sum()) - 1]
        picked = finite & (row <= kth)
        adj[i, picked] = True
    adj = adj | adj.T
    iu, ju = np.nonzero(np.triu(adj, k=1))
    weights = {(int(i), int(j)): 1.0 for i, j in zip(iu, ju)}
    return LaplacianGraph.from_weights(d, weights)


def empirical_covariance(m: np.ndarray, jitter: float = 0.0) -> np.ndarray:
    """Return m m^T / k + jitter * I for an d x k factor matrix."""
    m = np.asarray(m, dtype=float)
    k = m.shape[1]
    s = (m @ m.T) / k
    s = 0.5 * (s + s.T)
    if jitter:
        s = s + jitter * np.eye(m.shape[0])
    return s

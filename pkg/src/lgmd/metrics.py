"""Evaluation metrics: masked RMSE, principal subspace angles, factor column
correlations, edge-recovery counts, k-means and permutation-matched
clustering accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import DataMatrix, PrecisionGraph
from .errors import EmptySelection, RankDeficient, ZeroVariance


@dataclass
class MetricReport:
    """Per-fit metric values; unavailable metrics stay None.

    e3/e4 keep the full vectors of pairwise column correlations; the report
    writer summarizes them as mean absolute correlation.
    """

    e1: float | None = None
    e2: float | None = None
    e3: np.ndarray | None = None
    e4: np.ndarray | None = None
    e5: float | None = None
    e6: float | None = None
    e7: int | None = None
    e8: int | None = None
    clustering_accuracy: float | None = None
    context: float | None = None
    extras: dict[str, float] = field(default_factory=dict)

    def scalar_items(self) -> dict[str, float | None]:
        """Flattened scalar view used by the CSV writer."""
        out: dict[str, float | None] = {
            "e1": self.e1, "e2": self.e2,
            "e3_mean_abs": None if self.e3 is None else float(np.mean(np.abs(self.e3))),
            "e4_mean_abs": None if self.e4 is None else float(np.mean(np.abs(self.e4))),
            "e5": self.e5, "e6": self.e6,
            "e7": None if self.e7 is None else float(self.e7),
            "e8": None if self.e8 is None else float(self.e8),
            "clustering_accuracy": self.clustering_accuracy,
        }
        out.update(self.extras)
        return out


def masked_rmse(y: DataMatrix, recon: np.ndarray, o: np.ndarray) -> float:
    """Root mean squared error over the entries selected by ``o``."""
    o = np.asarray(o, dtype=bool)
    if o.shape != y.shape or recon.shape != y.shape:
        raise ValueError("shape mismatch")
    if not o.any():
        raise EmptySelection("selector picks no entries")
    diff = (y.values - recon)[o]
    return float(np.sqrt(np.mean(diff ** 2)))


def _orthonormal_basis(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    tol = max(m.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    r = int(np.sum(s > tol))
    if r == 0:
        raise RankDeficient("matrix has no numerically independent columns")
    return u[:, :r]


def subspace_angle(m1: np.ndarray, m2: np.ndarray) -> float:
    """Largest principal angle between the column spaces of two matrices.

    Uses the sine-based formula on orthonormal bases, which is accurate for
    small angles; symmetric in its arguments and invariant to
    right-multiplication by invertible matrices.
    """
    q1 = _orthonormal_basis(m1)
    q2 = _orthonormal_basis(m2)
    if q1.shape[1] < q2.shape[1]:
        q1, q2 = q2, q1
    resid = q2 - q1 @ (q1.T @ q2)
    s = np.linalg.svd(resid, compute_uv=False)
    return float(np.arcsin(min(1.0, float(s[0]) if s.size else 0.0)))


def column_correlations(m: np.ndarray) -> np.ndarray:
    """Pearson correlation for every unordered column pair, in (i<j)
    lexicographic order."""
    m = np.asarray(m, dtype=float)
    d, k = m.shape
    if k < 2:
        return np.zeros(0)
    stds = m.std(axis=0)
    bad = np.where(stds < 1e-15)[0]
    if bad.size:
        raise ZeroVariance("columns %s are constant" % bad.tolist())
    c = np.corrcoef(m, rowvar=False)
    iu, ju = np.triu_indices(k, k=1)
    return c[iu, ju]


def edge_recovery(g_true: PrecisionGraph, g_est: PrecisionGraph,
                  top_fraction: float) -> int:
    """Count how many of the strongest true edges appear in the estimate.

    True edges are ranked by |theta| magnitude and the top
    ceil(top_fraction * #edges) are kept.
    """
    if g_true.dim != g_est.dim:
        raise ValueError("graphs must share the dimension")
    if not (0 < top_fraction <= 1):
        raise ValueError("top_fraction must be in (0, 1]")
    edges = sorted(g_true.support,
                   key=lambda e: (-abs(g_true.theta[e[0], e[1]]), e))
    keep = edges[: math.ceil(top_fraction * len(edges))]
    return sum(1 for e in keep if e in g_est.support)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c] = points[rng.integers(n)]
            continue
        probs = d2 / total
        centers[c] = points[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, max_iter: int = 300):
    k = centers.shape[0]
    labels = np.zeros(points.shape[0], dtype=int)
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for c in range(k):
            sel = new_labels == c
            if sel.any():
                centers[c] = points[sel].mean(axis=0)
            else:  # re-seed an empty cluster at the farthest point
                far = int(d2.min(axis=1).argmax())
                centers[c] = points[far]
                new_labels[far] = c
        if np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels, inertia


def kmeans(points: np.ndarray, clusters: int, seed: int,
           restarts: int = 10) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; the best of ``restarts``
    runs by within-cluster sum of squares is kept. Deterministic given seed."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not (1 <= clusters <= n):
        raise ValueError("clusters must be in [1, n]")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        centers = _kmeans_pp_init(points, clusters, rng)
        labels, inertia = _lloyd(points, centers)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels


def clustering_accuracy(pred: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of agreements under the best label permutation (optimal
    assignment on the confusion matrix)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("label vectors must have equal length")
    pu, pi = np.unique(pred, return_inverse=True)
    tu, ti = np.unique(truth, return_inverse=True)
    conf = np.zeros((pu.size, tu.size))
    np.add.at(conf, (pi, ti), 1.0)
    rows, cols = linear_sum_assignment(-conf)
    return float(conf[rows, cols].sum() / pred.size)

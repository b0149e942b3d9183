"""Synthetic data generation: sparse ground-truth precision graphs,
matrix-normal factor sampling, noise injection and observation masks.

All generators are pure functions of their parameters and seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DataMatrix, PrecisionGraph
from .decomposition import _spd_sqrt_pair
from .errors import DegenerateMask


@dataclass
class SyntheticInstance:
    """Ground truth plus its noisy observation for one experiment cell."""

    y_gt: DataMatrix
    y_no: DataMatrix
    x_gt: np.ndarray
    w_gt: np.ndarray
    a_gt: PrecisionGraph
    b_gt: PrecisionGraph
    sigma_n: float
    seed: int
    labels: np.ndarray | None = None


def gen_sparse_precision(d: int, edge_fraction: float, seed: int,
                         negative_only: bool = False) -> PrecisionGraph:
    """Random sparse positive-definite precision matrix.

    The support is a uniformly random edge set of round(edge_fraction *
    d(d-1)/2) edges; off-diagonal weights have magnitude uniform on
    [0.4, 1] and random sign (all negative with ``negative_only``, which
    makes every partial correlation positive). The diagonal is the absolute
    row sum plus 0.5, so the matrix is strictly diagonally dominant and
    therefore positive definite.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    if not (0 < edge_fraction <= 1):
        raise ValueError("edge_fraction must be in (0, 1]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(d, k=1)
    total = iu.size
    m = max(1, int(round(edge_fraction * total)))
    picked = rng.choice(total, size=m, replace=False)
    mag = rng.uniform(0.4, 1.0, size=m)
    sign = -np.ones(m) if negative_only else rng.choice([-1.0, 1.0], size=m)
    theta = np.zeros((d, d))
    theta[iu[picked], ju[picked]] = sign * mag
    theta = theta + theta.T
    theta[np.diag_indices(d)] = np.abs(theta).sum(axis=1) + 0.5
    return PrecisionGraph(theta)


def sample_matrix_normal(rows: int, cols: int,
                         row_prec: PrecisionGraph | None = None,
                         col_prec: PrecisionGraph | None = None,
                         seed: int = 0) -> np.ndarray:
    """Draw one matrix-normal sample with the given row/column precisions.

    Z of iid standard normals is transformed to S_r^{1/2} Z S_c^{1/2} using
    the symmetric square roots of the precision inverses; ``None`` means an
    identity precision on that side.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((rows, cols))
    if row_prec is not None:
        _, r_isq = _spd_sqrt_pair(row_prec.theta)
        z = r_isq @ z
    if col_prec is not None:
        _, c_isq = _spd_sqrt_pair(col_prec.theta)
        z = z @ c_isq
    return z


def gen_mask(n: int, p: int, keep_fraction: float, seed: int) -> np.ndarray:
    """Uniform random boolean mask with exactly round(keep * n * p) True
    entries, resampled (up to 100 times) until every row and column keeps
    at least one observation."""
    if not (0 < keep_fraction <= 1):
        raise ValueError("keep_fraction must be in (0, 1]")
    count = int(round(keep_fraction * n * p))
    if count < 1:
        raise ValueError("keep_fraction keeps no entries")
    if count < max(n, p):
        raise DegenerateMask("cannot keep every row and column non-empty")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        flat = rng.choice(n * p, size=count, replace=False)
        mask = np.zeros(n * p, dtype=bool)
        mask[flat] = True
        mask = mask.reshape(n, p)
        if mask.any(axis=1).all() and mask.any(axis=0).all():
            return mask
    raise DegenerateMask("failed to draw a row/column-covering mask")


def gen_instance(n: int, p: int, k: int, sigma_ratio: float,
                 edge_fraction: float, seed: int) -> SyntheticInstance:
    """Full synthetic instance: sparse row/column precision graphs, matrix-
    normal factors, rank-k ground truth and additive Gaussian noise with
    std sigma_ratio * std(Y_gt)."""
    if k > min(n, p):
        raise ValueError("rank larger than min(n, p)")
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2 ** 63 - 1, size=4)
    a_gt = gen_sparse_precision(n, edge_fraction, int(seeds[0]))
    b_gt = gen_sparse_precision(p, edge_fraction, int(seeds[1]))
    x_gt = sample_matrix_normal(n, k, row_prec=a_gt, seed=int(seeds[2]))
    w_gt = sample_matrix_normal(p, k, row_prec=b_gt, seed=int(seeds[3]))
    y_gt = x_gt @ w_gt.T
    sigma_n = float(sigma_ratio) * float(np.std(y_gt))
    noise_rng = np.random.default_rng(rng.integers(0, 2 ** 63 - 1))
    y_no = y_gt + sigma_n * noise_rng.standard_normal((n, p)) if sigma_n > 0 \
        else y_gt.copy()
    return SyntheticInstance(DataMatrix(y_gt), DataMatrix(y_no),
                             x_gt, w_gt, a_gt, b_gt, sigma_n, seed)


def _block_precision(n: int, labels: np.ndarray, within_fraction: float,
                     seed: int) -> PrecisionGraph:
    """Sparse precision whose edges live inside label blocks, with negative
    off-diagonal weights (positive partial correlation within clusters)."""
    rng = np.random.default_rng(seed)
    theta = np.zeros((n, n))
    for c in np.unique(labels):
        idx = np.where(labels == c)[0]
        if idx.size < 2:
            continue
        iu, ju = np.triu_indices(idx.size, k=1)
        m = max(1, int(round(within_fraction * iu.size)))
        picked = rng.choice(iu.size, size=m, replace=False)
        w = rng.uniform(0.4, 1.0, size=m)
        theta[idx[iu[picked]], idx[ju[picked]]] = -w
    theta = theta + theta.T
    theta[np.diag_indices(n)] = np.abs(theta).sum(axis=1) + 0.5
    return PrecisionGraph(theta)


def gen_cluster_instance(n: int, p: int, k: int, n_clusters: int,
                         sigma_ratio: float, seed: int,
                         edge_fraction: float = 0.2,
                         separation: float = 1.0) -> SyntheticInstance:
    """Graph-structured mixture: rows fall into clusters, the sample graph
    connects rows within a cluster, and cluster centers separate the latent
    rows by ``separation`` standard deviations."""
    if n_clusters > n:
        raise ValueError("more clusters than rows")
    rng = np.random.default_rng(seed)
    labels = np.sort(rng.integers(0, n_clusters, size=n))
    # guarantee every cluster appears
    labels[:n_clusters] = np.arange(n_clusters)
    seeds = rng.integers(0, 2 ** 63 - 1, size=5)
    a_gt = _block_precision(n, labels, edge_fraction, int(seeds[0]))
    b_gt = gen_sparse_precision(p, 0.06, int(seeds[1]))
    centers = separation * np.random.default_rng(int(seeds[2])).standard_normal(
        (n_clusters, k))
    x_gt = sample_matrix_normal(n, k, row_prec=a_gt, seed=int(seeds[3])) \
        + centers[labels]
    w_gt = sample_matrix_normal(p, k, row_prec=b_gt, seed=int(seeds[4]))
    y_gt = x_gt @ w_gt.T
    sigma_n = float(sigma_ratio) * float(np.std(y_gt))
    noise_rng = np.random.default_rng(rng.integers(0, 2 ** 63 - 1))
    y_no = y_gt + sigma_n * noise_rng.standard_normal((n, p)) if sigma_n > 0 \
        else y_gt.copy()
    return SyntheticInstance(DataMatrix(y_gt), DataMatrix(y_no), x_gt, w_gt,
                             a_gt, b_gt, sigma_n, seed, labels=labels)

"""Hyperparameter search over the two penalty weights.

Random log-uniform search is the default; the surrogate mode interpolates the
observed scores with radial basis functions and probes the maximizer of an
expected-improvement acquisition on a fixed grid. Both return the best pair
actually evaluated, so the surrogate can never do worse than its own random
probes.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import RBFInterpolator
from scipy.stats import norm

from ..core import DataMatrix
from ..errors import LgmdError
from ..metrics import masked_rmse
from ..synth import gen_instance, gen_mask
from .config import ExperimentConfig

_GRID = 64


def minimize_2d(objective, bounds1, bounds2, budget: int, seed: int,
                mode: str = "random"):
    """Minimize a black-box score over a log-scale 2-D box.

    Returns ``(x1, x2, best_score, history)`` where history is the list of
    ((x1, x2), score) probes in evaluation order. Failed evaluations score
    +inf and never win.
    """
    if mode not in ("random", "surrogate"):
        raise ValueError("mode must be 'random' or 'surrogate'")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    lo1, hi1 = math.log10(bounds1[0]), math.log10(bounds1[1])
    lo2, hi2 = math.log10(bounds2[0]), math.log10(bounds2[1])
    rng = np.random.default_rng(seed)
    history: list[tuple[tuple[float, float], float]] = []

    def probe(u1, u2):
        x = (10.0 ** (lo1 + u1 * (hi1 - lo1)), 10.0 ** (lo2 + u2 * (hi2 - lo2)))
        try:
            score = float(objective(*x))
        except LgmdError:
            score = np.inf
        if not np.isfinite(score):
            score = np.inf
        history.append((x, score))
        return score

    n_random = budget if mode == "random" else max(4, budget // 3)
    n_random = min(n_random, budget)
    units = rng.random((n_random, 2))
    for u1, u2 in units:
        probe(u1, u2)

    if mode == "surrogate":
        g = (np.arange(_GRID) + 0.5) / _GRID
        gx, gy = np.meshgrid(g, g, indexing="ij")
        grid = np.column_stack([gx.ravel(), gy.ravel()])
        probed_units = list(units)
        while len(history) < budget:
            pts = np.array(probed_units)
            vals = np.array([s for _, s in history])
            ok = np.isfinite(vals)
            if ok.sum() < 3:
                u = rng.random(2)
            else:
                u = _ei_candidate(pts[ok], vals[ok], grid)
                if u is None:
                    u = rng.random(2)
            probed_units.append(u)
            probe(u[0], u[1])

    best_idx = int(np.argmin([s for _, s in history]))
    (b1, b2), best = history[best_idx]
    return b1, b2, best, history


def _ei_candidate(pts: np.ndarray, vals: np.ndarray, grid: np.ndarray):
    """Expected-improvement maximizer on the unit grid, with an RBF mean and
    a nearest-probe-distance uncertainty proxy."""
    # deduplicate probe locations for the interpolator
    _, keep = np.unique(np.round(pts, 9), axis=0, return_index=True)
    pts, vals = pts[np.sort(keep)], vals[np.sort(keep)]
    if len(pts) < 3:
        return None
    spread = float(vals.std()) or float(abs(vals.mean())) or 1.0
    try:
        mu = RBFInterpolator(pts, vals, kernel="thin_plate_spline")(grid)
    except np.linalg.LinAlgError:
        return None
    d = np.sqrt(((grid[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)).min(axis=1)
    sigma = spread * np.minimum(d / 0.25, 1.0) + 1e-12
    best = vals.min()
    z = (best - mu) / sigma
    ei = (best - mu) * norm.cdf(z) + sigma * norm.pdf(z)
    idx = int(np.argmax(ei))
    if ei[idx] <= 0 or d[idx] < 1e-6:
        return None
    return grid[idx]


def _tuning_objective(cfg: ExperimentConfig, method: str):
    """Held-out masked RMSE of one method on a representative instance.

    A validation subset of the observed entries is removed from the training
    mask; the fit never sees it.
    """
    from .experiments import _fit_and_factors  # local import avoids a cycle

    sweep = sorted(cfg.sweep)
    level = sweep[len(sweep) // 2]
    inst_seed = _derived_seed(cfg.seed, 900)
    if cfg.task == "complete":
        inst = gen_instance(cfg.n, cfg.p, cfg.rank, 0.0, cfg.edge_fraction, inst_seed)
        keep = min(level, 1.0 - cfg.holdout_fraction)
        base_mask = gen_mask(cfg.n, cfg.p, keep, _derived_seed(cfg.seed, 901))
    else:
        inst = gen_instance(cfg.n, cfg.p, cfg.rank, level, cfg.edge_fraction, inst_seed)
        base_mask = np.ones((cfg.n, cfg.p), dtype=bool)
    rng = np.random.default_rng(_derived_seed(cfg.seed, 902))
    obs_idx = np.flatnonzero(base_mask)
    n_val = max(1, int(round(cfg.holdout_fraction * obs_idx.size)))
    val_idx = rng.choice(obs_idx, size=n_val, replace=False)
    val_mask = np.zeros(cfg.n * cfg.p, dtype=bool)
    val_mask[val_idx] = True
    val_mask = val_mask.reshape(cfg.n, cfg.p)
    train_mask = base_mask & ~val_mask
    y_train = DataMatrix(inst.y_no.values, train_mask)

    def objective(lambda1, lambda2):
        h = cfg.hyperparams()
        h.lambda1, h.lambda2 = lambda1, lambda2
        _fit, factors, _graphs = _fit_and_factors(method, y_train, cfg, h)
        return masked_rmse(inst.y_no, factors.product(), val_mask)

    return objective


def _derived_seed(base: int, *keys: int) -> int:
    return int(np.random.SeedSequence([int(base)] + [int(k) for k in keys])
               .generate_state(1)[0])


def tune_hyperparams(cfg: ExperimentConfig, budget: int,
                     mode: str = "random") -> tuple[float, float]:
    """Search the configured log-scale box for the penalty pair with the
    lowest held-out masked RMSE. Only the two penalty weights are tuned; the
    sparsity constants stay fixed."""
    method = cfg.methods[0]
    if method in ("pca", "kmeans"):
        raise ValueError("method %r has no penalty weights to tune" % method)
    objective = _tuning_objective(cfg, method)
    l1, l2, _best, _hist = minimize_2d(
        objective, cfg.lambda1_bounds, cfg.lambda2_bounds, budget,
        _derived_seed(cfg.seed, 903), mode=mode)
    return l1, l2

"""Sparse precision estimation.

Three estimators: a thresholded closed-form graphical-lasso solver (the fast
path used inside the decomposition loop), a dense proximal-gradient
graphical-lasso oracle for validation at test scale, and a
Laplacian-constrained maximum-likelihood estimator for non-negative graph
weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import Edge, LaplacianGraph, PrecisionGraph, support_of
from .errors import NearSingularPair, NotConverged, NotPositiveDefinite

logger = logging.getLogger(__name__)

# geometric ladder of diagonal shifts used to repair an indefinite
# closed-form result (smallest entry restoring PD is applied)
_PD_LADDER_BASE = 1e-8
_PD_LADDER_STEP = 10.0 ** 0.5


@dataclass
class ResidualCovariance:
    """Soft-thresholded covariance: off-diagonals shrunk toward zero by lam."""

    sigma_res: np.ndarray
    support: frozenset[Edge]


def residual_threshold(sigma: np.ndarray, lam: float) -> ResidualCovariance:
    """Soft-threshold the off-diagonal entries of a symmetric matrix by lam.

    Entry (i, j), i != j becomes sigma_ij - lam * sign(sigma_ij) when
    |sigma_ij| > lam and zero otherwise; the diagonal is copied unchanged.
    """
    sigma = np.asarray(sigma, dtype=float)
    if lam < 0:
        raise ValueError("lam must be non-negative")
    off = sigma - np.diag(np.diag(sigma))
    shrunk = np.sign(off) * np.maximum(np.abs(off) - lam, 0.0)
    res = shrunk + np.diag(np.diag(sigma))
    return ResidualCovariance(res, support_of(shrunk))


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
        return True
    except np.linalg.LinAlgError:
        return False


def _chol_logdet(m: np.ndarray) -> float | None:
    """log-determinant via Cholesky, or None when not PD."""
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def threshold_glasso_with_shift(s: np.ndarray, eta: float) -> tuple[PrecisionGraph, float]:
    """threshold_glasso, also returning the diagonal repair shift applied."""
    s = np.asarray(s, dtype=float)
    d = s.shape[0]
    diag = np.diag(s)
    if np.any(diag <= 0):
        raise ValueError("covariance diagonal must be strictly positive")
    res = residual_threshold(s, eta)
    r = res.sigma_res
    theta = np.zeros((d, d))
    np.fill_diagonal(theta, 1.0 / diag)
    if res.support:
        iu = np.array([e[0] for e in sorted(res.support)])
        ju = np.array([e[1] for e in sorted(res.support)])
        rij = r[iu, ju]
        den = diag[iu] * diag[ju] - rij ** 2
        if np.any(den <= 1e-12):
            raise NearSingularPair(
                "Sigma_ii*Sigma_jj - res_ij^2 <= 1e-12 on a retained edge; "
                "eta is too small for this covariance")
        theta[iu, ju] = -rij / den
        theta[ju, iu] = theta[iu, ju]
        corr = rij ** 2 / den
        bump = np.zeros(d)
        np.add.at(bump, iu, corr)
        np.add.at(bump, ju, corr)
        theta[np.diag_indices(d)] = (1.0 + bump) / diag
    theta = 0.5 * (theta + theta.T)
    shift = 0.0
    if not _is_pd(theta):
        lam_min = float(np.linalg.eigvalsh(theta)[0])
        # smallest ladder entry that clears the negative eigenvalue
        k_steps = max(0, int(np.ceil(
            np.log(max(-lam_min, _PD_LADDER_BASE) / _PD_LADDER_BASE)
            / np.log(_PD_LADDER_STEP))))
        shift = _PD_LADDER_BASE * _PD_LADDER_STEP ** k_steps
        while not _is_pd(theta + shift * np.eye(d)):
            shift *= _PD_LADDER_STEP
            if shift > 1e12:
                raise NotPositiveDefinite(
                    "closed-form precision could not be repaired")
        logger.debug("closed-form precision repaired with diagonal shift %g", shift)
        theta = theta + shift * np.eye(d)
    return PrecisionGraph(theta), shift


def threshold_glasso(s: np.ndarray, eta: float) -> PrecisionGraph:
    """Approximate closed-form sparse precision estimate from a covariance.

    Off-diagonals of ``s`` are soft-thresholded by ``eta``; retained edges get
    theta_ij = -res_ij / (s_ii s_jj - res_ij^2) and the diagonal collects the
    matching correction terms. If the assembled matrix is indefinite, the
    smallest diagonal shift from a fixed ladder restoring positive
    definiteness is added (and logged).

    Raises
    ------
    NearSingularPair
        If s_ii * s_jj - res_ij^2 <= 1e-12 for some retained edge.
    """
    graph, _ = threshold_glasso_with_shift(s, eta)
    return graph


def _l1_off(theta: np.ndarray) -> float:
    return float(np.abs(theta).sum() - np.abs(np.diag(theta)).sum())


def _glasso_objective(theta: np.ndarray, s: np.ndarray, eta: float) -> float:
    sign, logdet = np.linalg.slogdet(theta)
    if sign <= 0:
        return -np.inf
    return logdet - float(np.sum(s * theta)) - eta * _l1_off(theta)


def _soft_threshold_off(m: np.ndarray, t: float) -> np.ndarray:
    diag = np.diag(m).copy()
    out = np.sign(m) * np.maximum(np.abs(m) - t, 0.0)
    np.fill_diagonal(out, diag)
    return out


def _kkt_from_grad(r: np.ndarray, theta: np.ndarray, eta: float) -> float:
    d = theta.shape[0]
    resid = np.abs(np.diag(r)).max(initial=0.0)
    iu, ju = np.triu_indices(d, k=1)
    tij = theta[iu, ju]
    rij = r[iu, ju]
    on = tij != 0
    if on.any():
        resid = max(resid, np.abs(rij[on] - eta * np.sign(tij[on])).max())
    if (~on).any():
        resid = max(resid, np.maximum(np.abs(rij[~on]) - eta, 0.0).max())
    return float(resid)


def glasso_kkt_residual(theta: np.ndarray, s: np.ndarray, eta: float) -> float:
    """Max violation of the stationarity conditions of the penalized likelihood."""
    return _kkt_from_grad(np.linalg.inv(theta) - s, theta, eta)


def glasso_oracle(s: np.ndarray, eta: float, tol: float = 1e-8,
                  max_iter: int = 50000,
                  trace: list[float] | None = None) -> PrecisionGraph:
    """Penalized-likelihood precision estimate by proximal gradient.

    Maximizes ln|Theta| - tr(S Theta) - eta * ||Theta||_{1,off} with ISTA
    steps (soft-threshold the off-diagonals) and backtracking line search.
    Intended as a slow, dependable reference at small dimensions (d <= 200).
    ``trace``, when given, collects the objective after every step.

    Raises
    ------
    NotConverged
        If the iteration cap is hit before the relative objective change
        drops below ``tol`` with stationarity residual below ``10 * tol``.
    """
    s = np.asarray(s, dtype=float)
    d = s.shape[0]
    if d > 200:
        raise ValueError("oracle is restricted to d <= 200")
    if np.any(np.diag(s) <= 0):
        raise ValueError("covariance diagonal must be strictly positive")
    kkt_target = 10 * max(tol, 1e-10)
    theta = np.diag(1.0 / np.diag(s))
    logdet = float(np.sum(np.log(np.diag(theta))))
    obj = logdet - float(np.sum(s * theta)) - eta * _l1_off(theta)
    rel = np.inf
    step = 1.0
    for _ in range(max_iter):
        tinv = np.linalg.inv(theta)
        if rel < tol and _kkt_from_grad(tinv - s, theta, eta) < kkt_target:
            return PrecisionGraph(0.5 * (theta + theta.T))
        grad = s - tinv  # gradient of the smooth part to descend
        g_val = float(np.sum(s * theta)) - logdet
        # descent-lemma floor keeps float-noise rejections from collapsing
        # the (otherwise shrink-only) step
        step = max(step, 0.9 / max(float(np.sum(tinv * tinv)), 1e-12))
        slack = 1e-14 * max(1.0, abs(g_val))
        accepted = False
        for _bt in range(80):
            cand = _soft_threshold_off(theta - step * grad, step * eta)
            cand_logdet = _chol_logdet(cand)
            if cand_logdet is not None:
                diff = cand - theta
                if np.abs(diff).max(initial=0.0) <= 1e-15 * (1.0 + np.abs(theta).max()):
                    break  # stalled at float resolution
                g_cand = float(np.sum(s * cand)) - cand_logdet
                quad = g_val + float(np.sum(grad * diff)) \
                    + float(np.sum(diff * diff)) / (2.0 * step)
                if g_cand <= quad + slack:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            if _kkt_from_grad(tinv - s, theta, eta) < kkt_target:
                return PrecisionGraph(0.5 * (theta + theta.T))
            raise NotConverged("line search stalled in glasso oracle")
        logdet = cand_logdet
        new_obj = logdet - float(np.sum(s * cand)) - eta * _l1_off(cand)
        rel = abs(new_obj - obj) / max(abs(obj), 1e-12)
        theta, obj = cand, new_obj
        if trace is not None:
            trace.append(obj)
    raise NotConverged("glasso oracle did not converge in %d iterations" % max_iter)


def _laplacian_from_vector(w: np.ndarray, iu: np.ndarray, ju: np.ndarray,
                           d: int) -> np.ndarray:
    lap = np.zeros((d, d))
    lap[iu, ju] = -w
    lap[ju, iu] = -w
    deg = np.zeros(d)
    np.add.at(deg, iu, w)
    np.add.at(deg, ju, w)
    lap[np.diag_indices(d)] = deg
    return lap


def laplacian_constrained_glasso(
    s: np.ndarray,
    rho: float,
    sigma2: float | str = "optimize",
    max_iter: int = 20000,
    pg_tol_scale: float = 1e-6,
    trace: list[float] | None = None,
) -> tuple[LaplacianGraph, float]:
    """Estimate a graph Laplacian L and variance so that L + (1/sigma^2) I
    maximizes the l1-penalized Gaussian log-likelihood.

    The precision is parameterized by the d(d-1)/2 non-negative edge weights
    of L and optimized by projected gradient ascent with backtracking; the
    l1 penalty covers every entry of the precision, which is linear in the
    weights. With ``sigma2="optimize"`` the variance is refreshed by an exact
    1-D coordinate-ascent solve each sweep.

    Returns the Laplacian and the (possibly optimized) sigma^2 at a point
    whose projected-gradient norm is below ``pg_tol_scale * d``.
    """
    s = np.asarray(s, dtype=float)
    d = s.shape[0]
    if rho < 0:
        raise ValueError("rho must be non-negative")
    optimize_sigma = isinstance(sigma2, str)
    if optimize_sigma and sigma2 != "optimize":
        raise ValueError("sigma2 must be a positive real or 'optimize'")
    if optimize_sigma:
        sv = 1.0 / max(float(np.mean(np.diag(s))), 1e-12)
    else:
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        sv = 1.0 / float(sigma2)

    iu, ju = np.triu_indices(d, k=1)
    bs = s[iu, iu] + s[ju, ju] - 2.0 * s[iu, ju]  # b_e^T S b_e per edge
    tr_s = float(np.trace(s))
    w = np.zeros(iu.size)

    def objective(wv: np.ndarray, svv: float) -> float:
        theta = _laplacian_from_vector(wv, iu, ju, d) + svv * np.eye(d)
        sign, logdet = np.linalg.slogdet(theta)
        if sign <= 0:
            return -np.inf
        lin = float(wv @ bs) + svv * tr_s
        l1 = 4.0 * float(wv.sum()) + d * svv
        return logdet - lin - rho * l1

    def refresh_sigma(wv: np.ndarray) -> float:
        mu = np.linalg.eigvalsh(_laplacian_from_vector(wv, iu, ju, d))
        mu = np.maximum(mu, 0.0)
        c = tr_s + rho * d

        def h(x):
            return float(np.sum(1.0 / (mu + x))) - c

        lo = 1e-12
        hi = max(1.0, d / c)
        while h(hi) > 0:
            hi *= 4.0
        if h(lo) < 0:
            return lo
        return float(brentq(h, lo, hi, xtol=1e-14, rtol=1e-12))

    obj = objective(w, sv)
    step = 1.0
    tol = pg_tol_scale * d
    for _ in range(max_iter):
        if optimize_sigma:
            sv = refresh_sigma(w)
            obj = objective(w, sv)
        theta = _laplacian_from_vector(w, iu, ju, d) + sv * np.eye(d)
        tinv = np.linalg.inv(theta)
        qd = np.diag(tinv)
        grad = qd[iu] + qd[ju] - 2.0 * tinv[iu, ju] - bs - 4.0 * rho
        pg = np.where(w > 0, grad, np.maximum(grad, 0.0))
        if np.linalg.norm(pg) < tol:
            break
        accepted = False
        for _bt in range(60):
            cand = np.maximum(w + step * grad, 0.0)
            cand_obj = objective(cand, sv)
            gain = float(grad @ (cand - w))
            if cand_obj >= obj + 1e-4 * gain and np.isfinite(cand_obj):
                accepted = True
                break
            step *= 0.5
        if not accepted or cand_obj < obj - 1e-12 * max(1.0, abs(obj)):
            # no ascent direction left at float precision
            if np.linalg.norm(pg) < 10 * tol:
                break
            raise NotConverged("projected-gradient line search stalled")
        w, obj = cand, cand_obj
        if trace is not None:
            trace.append(obj)
        step = min(step * 2.0, 1e8)
    else:
        raise NotConverged(
            "Laplacian-constrained estimation did not converge in %d sweeps" % max_iter)
    weights = {(int(i), int(j)): float(v)
               for i, j, v in zip(iu, ju, w) if v > 0.0}
    return LaplacianGraph.from_weights(d, weights), 1.0 / sv

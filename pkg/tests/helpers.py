"""Shared test utilities."""

import numpy as np


def chain_star_covariance(d, kind, rng):
    """Covariance whose strong off-diagonals form a chain or star, scaled so
    the matrix stays diagonally dominant and the soft-threshold validity
    regime holds (acyclic residual support, eta > 2 * max residual).

    Returns (sigma, eta, edges).
    """
    if kind == "chain":
        edges = [(i, i + 1) for i in range(d - 1)]
        deg_max = 2
    elif kind == "star":
        edges = [(0, j) for j in range(1, d)]
        deg_max = d - 1
    else:
        raise ValueError(kind)
    c = 0.8 / (deg_max + 0.225 * (d - 1 - deg_max) + 1.0)
    eta = 0.75 * c
    sigma = np.eye(d)
    for (i, j) in edges:
        mag = rng.uniform(0.9 * c, c)
        sign = rng.choice([-1.0, 1.0])
        sigma[i, j] = sigma[j, i] = sign * mag
    # sub-threshold clutter on a few non-edges
    iu, ju = np.triu_indices(d, k=1)
    edge_set = set(edges)
    for i, j in zip(iu, ju):
        if (i, j) in edge_set:
            continue
        if rng.random() < 0.3:
            v = rng.uniform(-0.3 * eta, 0.3 * eta)
            sigma[i, j] = sigma[j, i] = v
    return sigma, eta, edges


def random_spd(d, rng, cond=10.0):
    """Random symmetric positive-definite matrix with bounded conditioning."""
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    evals = np.exp(rng.uniform(0.0, np.log(cond), size=d))
    evals = evals / evals.max()
    return (q * evals) @ q.T

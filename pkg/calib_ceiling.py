"""Ceiling probe: graph-regularized ALS with the TRUE precision graphs, to
see how much subspace-angle improvement the prior can give at all."""
import sys

import numpy as np

from lgmd.core import Hyperparams, PrecisionGraph
from lgmd.decomposition import _fit_driver, fit_pca
from lgmd.metrics import subspace_angle
from lgmd.synth import gen_instance


class FixedGraphDriver:
    pass


def fit_with_fixed_precisions(y, h, a, b, exact=False):
    # reuse the identity-mode driver but patch penalties: quickest honest way
    from lgmd.core import DataMatrix, FactorPair
    from lgmd.decomposition import _init_factors, _inner_loop, _fidelity, _quad_penalty
    x, w = _init_factors(y, h.k)
    yv = y.observed_values()
    seg = []
    for outer in range(h.max_outer):
        x, w = _inner_loop(yv, y.mask, x, w, a.theta, b.theta, h, 0.0, exact, seg)
    return FactorPair(x, w)


ratio = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
n_seeds = 8
insts = [gen_instance(100, 100, 20, ratio, 0.06, seed=2000 + s)
         for s in range(n_seeds)]
pca_e5 = np.array([subspace_angle(i.x_gt, fit_pca(i.y_no, 20).factors.x)
                   for i in insts])
print("PCA E5 %.4f" % pca_e5.mean())

for l1, l2 in [(1, 0.01), (5, 0.05), (10, 0.1), (20, 0.2), (50, 0.5),
               (100, 1.0), (200, 2.0), (400, 4.0)]:
    e5 = []
    for inst in insts:
        h = Hyperparams(k=20, lambda1=l1, lambda2=l2, max_outer=10,
                        max_inner=50)
        # normalized true precisions, as the algorithm would use them
        a = PrecisionGraph(inst.a_gt.theta / np.mean(np.diag(inst.a_gt.theta)))
        b = PrecisionGraph(inst.b_gt.theta / np.mean(np.diag(inst.b_gt.theta)))
        f = fit_with_fixed_precisions(inst.y_no, h, a, b)
        e5.append(subspace_angle(inst.x_gt, f.x))
    e5 = np.array(e5)
    print("l1=%-4g l2=%-4g | dE5 %+.5f win %.2f" %
          (l1, l2, (e5 - pca_e5).mean(), (e5 < pca_e5).mean()))

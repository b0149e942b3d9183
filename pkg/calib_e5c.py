"""Deeper probe: feedback iterations, asymmetric eta, exact solver."""
import sys

import numpy as np

from lgmd.core import Hyperparams
from lgmd.decomposition import fit_lgmd, fit_pca
from lgmd.metrics import subspace_angle
from lgmd.synth import gen_instance

ratio = 0.5
n_seeds = 12
insts = [gen_instance(100, 100, 20, ratio, 0.06, seed=2000 + s)
         for s in range(n_seeds)]
pca_e5 = np.array([subspace_angle(i.x_gt, fit_pca(i.y_no, 20).factors.x)
                   for i in insts])
pca_e6 = np.array([subspace_angle(i.w_gt, fit_pca(i.y_no, 20).factors.w)
                   for i in insts])
print("PCA E5 %.4f E6 %.4f" % (pca_e5.mean(), pca_e6.mean()))

configs = [
    dict(tag="base", l1=5, l2=0.05, eta=6, mo=20, to=1e-5, exact=False),
    dict(tag="deep", l1=5, l2=0.05, eta=6, mo=40, to=1e-8, exact=False),
    dict(tag="l1=10 deep", l1=10, l2=0.1, eta=6, mo=40, to=1e-8, exact=False),
    dict(tag="exact l20", l1=20, l2=0.2, eta=6, mo=20, to=1e-6, exact=True),
    dict(tag="exact l50", l1=50, l2=0.5, eta=6, mo=20, to=1e-6, exact=True),
    dict(tag="exact l100", l1=100, l2=1.0, eta=6, mo=20, to=1e-6, exact=True),
    dict(tag="exact l50 e10", l1=50, l2=0.5, eta=10, mo=20, to=1e-6, exact=True),
    dict(tag="exact l200", l1=200, l2=2.0, eta=6, mo=20, to=1e-6, exact=True),
]
for c in configs:
    e5s, e6s, outers = [], [], []
    for inst in insts:
        h = Hyperparams(k=20, lambda1=c["l1"], lambda2=c["l2"], eta1=c["eta"],
                        eta2=c["eta"], max_outer=c["mo"], max_inner=50,
                        tol_outer=c["to"])
        r = fit_lgmd(inst.y_no, h, exact=c["exact"])
        e5s.append(subspace_angle(inst.x_gt, r.factors.x))
        e6s.append(subspace_angle(inst.w_gt, r.factors.w))
        outers.append(r.diagnostics["outer_iterations"])
    e5s, e6s = np.array(e5s), np.array(e6s)
    d5 = e5s - pca_e5
    print("%-14s | dE5 %+.5f+-%.5f win %.2f | dE6 %+.5f win %.2f | outers %.0f"
          % (c["tag"], d5.mean(), d5.std(), (d5 < 0).mean(),
             (e6s - pca_e6).mean(), (e6s < pca_e6).mean(), np.mean(outers)))

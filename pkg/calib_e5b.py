"""Finer calibration: win rates and mean deltas vs PCA over 10 seeds."""
import sys
import time

import numpy as np

from lgmd.core import Hyperparams
from lgmd.decomposition import fit_lgmd, fit_pca
from lgmd.metrics import subspace_angle
from lgmd.synth import gen_instance

ratio = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
n_seeds = int(sys.argv[2]) if len(sys.argv) > 2 else 10

insts = [gen_instance(100, 100, 20, ratio, 0.06, seed=2000 + s)
         for s in range(n_seeds)]
pca_e5 = np.array([subspace_angle(i.x_gt, fit_pca(i.y_no, 20).factors.x)
                   for i in insts])
pca_e6 = np.array([subspace_angle(i.w_gt, fit_pca(i.y_no, 20).factors.w)
                   for i in insts])
print("PCA  E5 %.4f E6 %.4f" % (pca_e5.mean(), pca_e6.mean()))

combos = [(2, 0.02), (5, 0.05), (10, 0.1), (20, 0.2)]
etas = [6.0, 10.0, 14.0]
for l1, l2 in combos:
    for eta in etas:
        t0 = time.time()
        e5s, e6s = [], []
        for inst in insts:
            h = Hyperparams(k=20, lambda1=l1, lambda2=l2, eta1=eta, eta2=eta,
                            max_outer=20, max_inner=50)
            r = fit_lgmd(inst.y_no, h)
            e5s.append(subspace_angle(inst.x_gt, r.factors.x))
            e6s.append(subspace_angle(inst.w_gt, r.factors.w))
        e5s, e6s = np.array(e5s), np.array(e6s)
        print("l1=%-4g l2=%-4g eta=%-3g | dE5 %+.5f win %.2f | dE6 %+.5f win %.2f | %.0fs"
              % (l1, l2, eta, (e5s - pca_e5).mean(), (e5s < pca_e5).mean(),
                 (e6s - pca_e6).mean(), (e6s < pca_e6).mean(), time.time() - t0))

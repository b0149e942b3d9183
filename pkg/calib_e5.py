"""Calibration probe: paired E5/E6 comparison LGMD vs PCA on the synthetic
protocol. Not part of the package."""
import itertools
import sys
import time

import numpy as np

from lgmd.core import DataMatrix, Hyperparams
from lgmd.decomposition import fit_lgmd, fit_pca
from lgmd.metrics import subspace_angle
from lgmd.synth import gen_instance

ratio = float(sys.argv[1]) if len(sys.argv) > 1 else 0.5
seeds = range(6)

lams = [(0.5, 0.005), (2.0, 0.02), (5.0, 0.05), (20.0, 0.2), (50.0, 0.5)]
etas = [2.0, 4.0, 8.0]

insts = [gen_instance(100, 100, 20, ratio, 0.06, seed=1000 + s) for s in seeds]
pca_e5, pca_e6 = [], []
for inst in insts:
    f = fit_pca(inst.y_no, 20).factors
    pca_e5.append(subspace_angle(inst.x_gt, f.x))
    pca_e6.append(subspace_angle(inst.w_gt, f.w))
pca_e5, pca_e6 = np.array(pca_e5), np.array(pca_e6)
print("PCA  E5 %.4f  E6 %.4f" % (pca_e5.mean(), pca_e6.mean()))

for (l1, l2), eta in itertools.product(lams, etas):
    t0 = time.time()
    e5s, e6s, edges = [], [], []
    for inst in insts:
        h = Hyperparams(k=20, lambda1=l1, lambda2=l2, eta1=eta, eta2=eta,
                        max_outer=10, max_inner=50)
        r = fit_lgmd(inst.y_no, h)
        e5s.append(subspace_angle(inst.x_gt, r.factors.x))
        e6s.append(subspace_angle(inst.w_gt, r.factors.w))
        edges.append(len(r.a.support))
    e5s, e6s = np.array(e5s), np.array(e6s)
    win5 = (e5s < pca_e5).mean()
    win6 = (e6s < pca_e6).mean()
    print("l1=%-5g l2=%-5g eta=%-3g | E5 %.4f (win %.2f) E6 %.4f (win %.2f) "
          "| a-edges %.0f | %.1fs"
          % (l1, l2, eta, e5s.mean(), win5, e6s.mean(), win6,
             np.mean(edges), time.time() - t0))

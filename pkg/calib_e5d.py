"""X-side focused grid with deep feedback."""
import numpy as np

from lgmd.core import Hyperparams
from lgmd.decomposition import fit_lgmd, fit_pca
from lgmd.metrics import subspace_angle
from lgmd.synth import gen_instance

n_seeds = 12
insts = [gen_instance(100, 100, 20, 0.5, 0.06, seed=2000 + s)
         for s in range(n_seeds)]
pca_e5 = np.array([subspace_angle(i.x_gt, fit_pca(i.y_no, 20).factors.x)
                   for i in insts])
pca_e6 = np.array([subspace_angle(i.w_gt, fit_pca(i.y_no, 20).factors.w)
                   for i in insts])
print("PCA E5 %.4f E6 %.4f" % (pca_e5.mean(), pca_e6.mean()))

for l1 in (8.0, 12.0, 16.0, 24.0):
    for eta1 in (4.0, 6.0, 8.0):
        e5s, e6s = [], []
        for inst in insts:
            h = Hyperparams(k=20, lambda1=l1, lambda2=0.1, eta1=eta1, eta2=6.0,
                            max_outer=40, max_inner=50, tol_outer=1e-8)
            r = fit_lgmd(inst.y_no, h)
            e5s.append(subspace_angle(inst.x_gt, r.factors.x))
            e6s.append(subspace_angle(inst.w_gt, r.factors.w))
        d5 = np.array(e5s) - pca_e5
        d6 = np.array(e6s) - pca_e6
        print("l1=%-4g eta1=%-3g | dE5 %+.5f+-%.5f win %.2f | dE6 %+.5f win %.2f"
              % (l1, eta1, d5.mean(), d5.std(), (d5 < 0).mean(),
                 d6.mean(), (d6 < 0).mean()))

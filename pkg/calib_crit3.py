"""Dry run of acceptance criterion 3 at full protocol scale."""
import sys
import time

import numpy as np

from lgmd.core import Hyperparams, knn_graph
from lgmd.decomposition import fit_dgrmd, fit_lgmd, fit_pca
from lgmd.metrics import subspace_angle
from lgmd.synth import gen_instance

l1 = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0
l2 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.1
eta = float(sys.argv[3]) if len(sys.argv) > 3 else 6.0
mo = int(sys.argv[4]) if len(sys.argv) > 4 else 40

t0 = time.time()
for ratio in (0.1, 0.5, 1.0):
    rows = {m: {"e5": [], "e6": []} for m in ("pca", "dgrmd", "lgmd")}
    for s in range(30):
        inst = gen_instance(100, 100, 20, ratio, 0.06, seed=5000 + s)
        f = fit_pca(inst.y_no, 20).factors
        rows["pca"]["e5"].append(subspace_angle(inst.x_gt, f.x))
        rows["pca"]["e6"].append(subspace_angle(inst.w_gt, f.w))
        h = Hyperparams(k=20, lambda1=l1, lambda2=l2, eta1=eta, eta2=eta,
                        max_outer=mo, max_inner=50, tol_outer=1e-8)
        lg = knn_graph(inst.y_no, 5, "rows")
        lc = knn_graph(inst.y_no, 5, "columns")
        fd = fit_dgrmd(inst.y_no, h, lg, lc).factors
        rows["dgrmd"]["e5"].append(subspace_angle(inst.x_gt, fd.x))
        rows["dgrmd"]["e6"].append(subspace_angle(inst.w_gt, fd.w))
        fl = fit_lgmd(inst.y_no, h).factors
        rows["lgmd"]["e5"].append(subspace_angle(inst.x_gt, fl.x))
        rows["lgmd"]["e6"].append(subspace_angle(inst.w_gt, fl.w))
    p5 = np.array(rows["pca"]["e5"]); p6 = np.array(rows["pca"]["e6"])
    d5 = np.array(rows["dgrmd"]["e5"]); d6 = np.array(rows["dgrmd"]["e6"])
    l5 = np.array(rows["lgmd"]["e5"]); l6 = np.array(rows["lgmd"]["e6"])
    print("ratio %.1f | E5 means pca %.4f dgrmd %.4f lgmd %.4f | "
          "E6 means %.4f %.4f %.4f | paired lgmd<pca E5 %.2f E6 %.2f"
          % (ratio, p5.mean(), d5.mean(), l5.mean(),
             p6.mean(), d6.mean(), l6.mean(),
             (l5 < p5).mean(), (l6 < p6).mean()))
print("total %.0fs" % (time.time() - t0))

"""Criterion 4 probe: completion E1 across keep fractions, PMF vs LGMD vs dGRMD."""
import sys

import numpy as np

from lgmd.core import DataMatrix, Hyperparams, knn_graph
from lgmd.decomposition import fit_dgrmd, fit_lgmd, fit_pmf
from lgmd.metrics import masked_rmse
from lgmd.synth import gen_instance, gen_mask

l1 = float(sys.argv[1]) if len(sys.argv) > 1 else 10.0
l2 = float(sys.argv[2]) if len(sys.argv) > 2 else 0.1
eta = float(sys.argv[3]) if len(sys.argv) > 3 else 6.0
n_seeds = int(sys.argv[4]) if len(sys.argv) > 4 else 8

keeps = (0.3, 0.5, 0.8)
res = {m: {k: [] for k in keeps} for m in ("pmf", "dgrmd", "lgmd")}
for s in range(n_seeds):
    inst = gen_instance(100, 100, 20, 0.0, 0.06, seed=3000 + s)
    for keep in keeps:
        mask = gen_mask(100, 100, keep, seed=77000 + 1000 * s + int(keep * 100))
        y_train = DataMatrix(inst.y_no.values, mask)
        hold = ~mask
        h = Hyperparams(k=20, lambda1=l1, lambda2=l2, eta1=eta, eta2=eta,
                        max_outer=30, max_inner=60, tol_outer=1e-7)
        res["pmf"][keep].append(masked_rmse(
            inst.y_no, fit_pmf(y_train, h).factors.product(), hold))
        lg = knn_graph(y_train, 5, "rows")
        lc = knn_graph(y_train, 5, "columns")
        res["dgrmd"][keep].append(masked_rmse(
            inst.y_no, fit_dgrmd(y_train, h, lg, lc).factors.product(), hold))
        res["lgmd"][keep].append(masked_rmse(
            inst.y_no, fit_lgmd(y_train, h).factors.product(), hold))

std_y = np.std(gen_instance(100, 100, 20, 0.0, 0.06, seed=3000).y_gt.values)
print("data std %.2f" % std_y)
for m in res:
    means = [np.mean(res[m][k]) for k in keeps]
    mono = 0
    total = 0
    for s in range(n_seeds):
        for a, b in ((0.3, 0.5), (0.5, 0.8)):
            total += 1
            mono += res[m][a][s] >= res[m][b][s]
    print("%-6s E1 @0.3 %.4f @0.5 %.4f @0.8 %.4f | mono pairs %.2f"
          % (m, *means, mono / total))
paired = np.mean(np.array(res["lgmd"][0.3]) <= np.array(res["pmf"][0.3]))
print("LGMD<=PMF at 0.3: means %.4f vs %.4f, paired %.2f"
      % (np.mean(res["lgmd"][0.3]), np.mean(res["pmf"][0.3]), paired))

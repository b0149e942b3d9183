"""Criterion 9 probe: clustering accuracy ordering on graph-structured mixtures."""
import sys

import numpy as np

from lgmd.core import Hyperparams, knn_graph
from lgmd.decomposition import fit_dgrmd, fit_lgmd, fit_pmf, gpca_factors, gpca_postprocess
from lgmd.core import DataMatrix
from lgmd.metrics import clustering_accuracy, kmeans
from lgmd.synth import gen_cluster_instance

sep = float(sys.argv[1]) if len(sys.argv) > 1 else 1.0
ratio = float(sys.argv[2]) if len(sys.argv) > 2 else 1.0
l1 = float(sys.argv[3]) if len(sys.argv) > 3 else 10.0
l2 = float(sys.argv[4]) if len(sys.argv) > 4 else 0.1
eta = float(sys.argv[5]) if len(sys.argv) > 5 else 6.0
reps = int(sys.argv[6]) if len(sys.argv) > 6 else 6

n, p, k, c = 500, 60, 10, 5
acc = {m: [] for m in ("kmeans", "pmf", "dgrmd", "lgmd")}
for rep in range(reps):
    inst = gen_cluster_instance(n, p, k, c, ratio, seed=4000 + rep,
                                separation=sep)
    y = inst.y_no
    km_seed = 900 + rep
    acc["kmeans"].append(clustering_accuracy(
        kmeans(y.values, c, km_seed), inst.labels))
    h = Hyperparams(k=k, lambda1=l1, lambda2=l2, eta1=eta, eta2=eta,
                    max_outer=15, max_inner=50, tol_outer=1e-6)
    fp = fit_pmf(y, h)
    acc["pmf"].append(clustering_accuracy(
        kmeans(fp.factors.x, c, km_seed), inst.labels))
    lg = knn_graph(y, 5, "rows")
    lc = knn_graph(y, 5, "columns")
    fd = fit_dgrmd(y, h, lg, lc)
    acc["dgrmd"].append(clustering_accuracy(
        kmeans(fd.factors.x, c, km_seed), inst.labels))
    fl = fit_lgmd(y, h)
    acc["lgmd"].append(clustering_accuracy(
        kmeans(fl.factors.x, c, km_seed), inst.labels))

for m in ("lgmd", "dgrmd", "pmf", "kmeans"):
    a = np.array(acc[m])
    print("%-7s %.3f +- %.3f" % (m, a.mean(), a.std(ddof=1) / np.sqrt(len(a))))

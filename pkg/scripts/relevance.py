"""PCA relevance ranking of all 68 spiral features and the incremental-accuracy curve."""

import time

from _common import binary_cohort_dataset, emit, parser
from pdwriting.classify import params_to_dict
from pdwriting.evaluate import loocv_grid_search
from pdwriting.relevance import incremental_accuracy_curve, pca_relevance, ranking_rows

if __name__ == "__main__":
    p = parser(__doc__)
    p.set_defaults(features="kinem,geom,nld")
    p.add_argument("--tremor", type=float, default=0.3)
    args = p.parse_args()
    t0 = time.perf_counter()
    ds = binary_cohort_dataset(args.n_per_class, args.tremor, args.seed, args.features)
    rk = pca_relevance(ds.X)
    best = loocv_grid_search(ds.columns(rk.selected), "svm", seed=args.seed).best_params
    curve = incremental_accuracy_curve(ds, rk, best)
    rows = ranking_rows(ds.names, rk, curve)
    for rank, name, rho, acc in rows[:10]:
        print(f"{rank:3d} {name:24s} rho {rho:7.3f}  acc {acc:.4f}")
    emit({"experiment": "relevance", "retained": rk.retained, "svm_params": params_to_dict(best),
          "ranking": rows, "curve": curve}, args.out, t0)

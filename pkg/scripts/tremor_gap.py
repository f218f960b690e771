"""SVM LOOCV accuracy of healthy vs tremor cohorts across tremor gaps.

The default pair (0.3 and its half, 0.15) is the separation-and-degradation
experiment; ``--gaps`` sweeps any list.
"""

import time

from _common import binary_cohort_dataset, emit, parser
from pdwriting.classify import params_to_dict
from pdwriting.evaluate import loocv_grid_search

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--gaps", default="0.3,0.15")
    p.add_argument("--classifier", choices=("knn", "svm", "rf"), default="svm")
    args = p.parse_args()
    t0 = time.perf_counter()
    rows = []
    for gap in (float(g) for g in args.gaps.split(",")):
        ds = binary_cohort_dataset(args.n_per_class, gap, args.seed, args.features)
        rep = loocv_grid_search(ds, args.classifier, seed=args.seed)
        rows.append({"tremor_gap": gap, "accuracy": rep.accuracy, "f1": rep.metrics.f1, "auc": rep.roc.auc,
                     "best_params": params_to_dict(rep.best_params)})
        print(f"gap {gap:.3f}: accuracy {rep.accuracy:.4f} {params_to_dict(rep.best_params)}", flush=True)
    emit({"experiment": "tremor_gap", "seed": args.seed, "features": args.features, "rows": rows}, args.out, t0)

"""Four-class one-vs-all SVM under LOOCV on the tremor-ladder cohort."""

import time

from _common import emit, parser
from pdwriting.classify import params_to_dict
from pdwriting.evaluate import loocv_staging, staging_dataset
from pdwriting.pipeline import extract_table
from pdwriting.synth import SpiralParams, generate_staging_cohort

if __name__ == "__main__":
    p = parser(__doc__)
    p.set_defaults(n_per_class=20)
    p.add_argument("--ladder", default="0,0.1,0.25,0.5")
    args = p.parse_args()
    t0 = time.perf_counter()
    ladder = tuple(float(v) for v in args.ladder.split(","))
    cohort = generate_staging_cohort(args.n_per_class, SpiralParams(), ladder, seed=args.seed)
    rep = loocv_staging(staging_dataset(extract_table(cohort, "spiral", args.features.split(","))))
    for row in rep.confusion.row_percent():
        print("  " + "  ".join(f"{v:5.1f}" for v in row))
    emit({"experiment": "staging", "kappa": rep.kappa, "accuracy": rep.accuracy, "macro_f1": rep.f1,
          "best_params": params_to_dict(rep.best_params), "confusion": rep.confusion.to_dict()}, args.out, t0)

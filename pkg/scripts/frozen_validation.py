"""Grid search on a development cohort, then frozen parameters on a disjoint
validation cohort, with a call audit proving no search touched validation data."""

import time

from _common import binary_cohort_dataset, emit, parser
from pdwriting.classify import params_to_dict
from pdwriting.evaluate import call_audit, frozen_validation, loocv_grid_search

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--tremor", type=float, default=0.3)
    p.add_argument("--val-seed", type=int, default=10_000)
    args = p.parse_args()
    t0 = time.perf_counter()
    dev = binary_cohort_dataset(args.n_per_class, args.tremor, args.seed, args.features)
    search = loocv_grid_search(dev, "svm", seed=args.seed)
    val = binary_cohort_dataset(args.n_per_class, args.tremor, args.val_seed, args.features,
                                validation=True, id_prefix="V")
    with call_audit() as audit:
        rep = frozen_validation(search.best_params, dev, val, seed=args.seed)
    emit({
        "experiment": "frozen_validation",
        "dev_accuracy": search.accuracy,
        "validation_accuracy": rep.accuracy,
        "gap_points": 100 * abs(search.accuracy - rep.accuracy),
        "frozen_params": params_to_dict(search.best_params),
        "audit": {"grid_searches": audit.grid_searches, "fits": audit.fits, "fit_sizes": audit.fit_sizes},
    }, args.out, t0)

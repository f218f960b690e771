"""Batch front end: synth, extract, evaluate, relevance, stage, validate.

Exit codes: 0 success, 2 input error, 3 numeric failure. Errors are written
to stderr as one line of JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import params_from_dict, params_to_dict
from .evaluate import (
    binary_dataset,
    frozen_validation,
    loocv_grid_search,
    loocv_staging,
    parse_grid,
    staging_dataset,
)
from .evaluate.reports import atomic_write, histogram_csv, roc_csv, scores_csv, to_json, write_json, csv_text
from .features import read_feature_table, write_feature_table
from .geometry import ModelFitError, SpectralError
from .ingest import Task, read_cohort
from .nld import NldError
from .pipeline import ExtractionError, extract_table
from .relevance import incremental_accuracy_curve, pca_relevance, ranking_rows
from .rng import derive_seed
from .synth import SpiralParams, generate_cohort, generate_staging_cohort, write_cohort

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (ModelFitError, SpectralError, NldError, FloatingPointError, np.linalg.LinAlgError)


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# ---- config ----------------------------------------------------------------


def read_config(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise CliError(f"config line {lineno}: expected key=value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def merge_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Append config entries as flags, skipping those given on the command line."""
    path = None
    for k, a in enumerate(argv):
        if a == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
        elif a.startswith("--config="):
            path = a.split("=", 1)[1]
    if path is None:
        return argv
    command = next((a for a in argv if not a.startswith("-")), None)
    choices = parser._subparsers._group_actions[0].choices
    if command not in choices:
        return argv
    options = choices[command]._option_string_actions
    given = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
    extra = []
    for key, value in read_config(path).items():
        flag = "--" + key.replace("_", "-")
        if flag not in options or flag in ("--config", "--help"):
            raise CliError(f"config key {key!r} is not an option of {command}")
        if flag in given:
            continue
        if isinstance(options[flag], argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                extra.append(flag)
        else:
            extra += [flag, value]
    return argv + extra


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


# ---- helpers ---------------------------------------------------------------


def _provenance(args, seed: int, grid=None, table=None) -> dict:
    return {
        "tool": "pdwriting",
        "version": __version__,
        "command": args.command,
        "seed": seed,
        "grid": None if grid is None else [params_to_dict(p) for p in grid],
        "feature_hash": None if table is None else table.digest(),
        "features": None if table is None else list(table.names),
    }


def _load_table(path):
    p = Path(path)
    if not p.is_file():
        raise CliError(f"feature table not found: {p}")
    return read_feature_table(p)


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _parse_params(family: str, text: str):
    """Frozen hyperparameters: a report JSON path, or ``c=1,gamma=0.01`` style."""
    p = Path(text)
    if p.is_file():
        d = json.loads(p.read_text())
        d = d.get("best_params", d)
        return params_from_dict(d)
    kv = {}
    for part in text.replace(";", ",").split(","):
        if not part.strip():
            continue
        k, sep, v = part.partition("=")
        if not sep:
            raise CliError(f"frozen parameter {part!r} is not key=value")
        kv[k.strip()] = v.strip()
    casts = {"c": float, "gamma": float, "k": int, "n_trees": int, "max_depth": int}
    try:
        return params_from_dict({"family": family, **{k: casts[k](v) for k, v in kv.items()}})
    except (KeyError, TypeError) as exc:
        raise CliError(f"bad frozen parameters {text!r}: {exc}") from None


# ---- commands --------------------------------------------------------------


def cmd_synth(args) -> dict:
    base = SpiralParams(noise_std=args.noise)
    tasks = tuple(t.strip() for t in args.tasks.split(",") if t.strip())
    for t in tasks:
        Task.parse(t)
    if args.kind == "staging":
        ladder = tuple(float(v) for v in args.ladder.split(","))
        cohort = generate_staging_cohort(args.n_per_class, base, ladder, seed=args.seed, tasks=tasks,
                                         id_prefix=args.id_prefix or "G")
    else:
        cohort = generate_cohort(args.n_per_class, base.replace(tremor_amp=args.healthy_tremor),
                                 base.replace(tremor_amp=args.tremor), seed=args.seed, tasks=tasks,
                                 validation=args.validation, id_prefix=args.id_prefix or "S")
    manifest = write_cohort(cohort, args.out)
    return {"manifest": str(manifest), "subjects": len(cohort)}


def cmd_extract(args) -> dict:
    m = Path(args.manifest)
    if not m.is_file():
        raise CliError(f"manifest not found: {m}")
    cohort = read_cohort(m)
    table = extract_table(cohort, args.task, args.features.split(","), jobs=args.jobs)
    atomic_write(args.out, write_feature_table(table))
    return {"features": str(args.out), "rows": len(table), "columns": len(table.names)}


def cmd_evaluate(args) -> dict:
    table = _load_table(args.features)
    ds = binary_dataset(table)
    grid = parse_grid(args.classifier, args.grid)
    seed = derive_seed(args.seed, "classify")
    report = loocv_grid_search(ds, args.classifier, grid, seed=seed, standardize=not args.no_standardize)
    out = _out_dir(args.out)
    body = report.to_dict()
    body["standardized"] = not args.no_standardize
    body["provenance"] = _provenance(args, args.seed, grid, table)
    write_json(out / "report.json", body)
    atomic_write(out / "roc.csv", roc_csv(report.roc))
    atomic_write(out / "scores.csv", scores_csv(report.ids, report.labels, report.scores))
    atomic_write(out / "histogram.csv", histogram_csv(report.scores, report.labels))
    return {"report": str(out / "report.json"), "accuracy": report.accuracy,
            "best_params": params_to_dict(report.best_params)}


def cmd_relevance(args) -> dict:
    table = _load_table(args.features)
    ds = binary_dataset(table)
    ranking = pca_relevance(ds.X)
    reduced = ds.columns(ranking.selected)
    grid = parse_grid("svm", args.grid)
    standardize = not args.no_standardize
    # curve hyperparameters come from a grid search on the retained set
    best = loocv_grid_search(reduced, "svm", grid, seed=derive_seed(args.seed, "classify"),
                             standardize=standardize).best_params
    curve = incremental_accuracy_curve(ds, ranking, best, standardize=standardize)
    out = _out_dir(args.out)
    atomic_write(out / "ranking.csv", csv_text(("rank", "feature", "rho", "accuracy"),
                                               ranking_rows(ds.names, ranking, curve)))
    atomic_write(out / "curve.csv", csv_text(("k", "accuracy"), curve))
    write_json(out / "relevance.json", {
        "retained": ranking.retained,
        "svm_params": params_to_dict(best),
        "explained_variance": ranking.explained_variance.tolist(),
        "eigvals": ranking.eigvals.tolist(),
        "rho": dict(zip(ds.names, ranking.rho.tolist())),
        "provenance": _provenance(args, args.seed, grid, table),
    })
    return {"retained": ranking.retained, "ranking": str(out / "ranking.csv")}


def cmd_stage(args) -> dict:
    table = _load_table(args.features)
    ds = staging_dataset(table)
    grid = parse_grid("svm", args.grid)
    report = loocv_staging(ds, grid, standardize=not args.no_standardize)
    body = report.to_dict()
    body["provenance"] = _provenance(args, args.seed, grid, table)
    write_json(args.out, body)
    return {"staging": str(args.out), "accuracy": report.accuracy, "kappa": report.kappa}


def cmd_validate(args) -> dict:
    dev_t, val_t = _load_table(args.dev), _load_table(args.val)
    params = _parse_params(args.classifier, args.params)
    report = frozen_validation(params, binary_dataset(dev_t), binary_dataset(val_t),
                               seed=derive_seed(args.seed, "classify"), standardize=not args.no_standardize)
    body = report.to_dict()
    body["frozen_params"] = params_to_dict(params)
    body["provenance"] = _provenance(args, args.seed, [params], dev_t)
    body["provenance"]["validation_hash"] = val_t.digest()
    write_json(args.out, body)
    return {"report": str(args.out), "accuracy": report.accuracy}


# ---- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pdwriting", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pdwriting {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_help):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", required=True, help=out_help)
        sp.add_argument("--config", help="flat key=value file mirroring the flags")

    s = sub.add_parser("synth", help="write a synthetic cohort (recordings + manifest)")
    common(s, "output directory")
    s.add_argument("--kind", choices=("binary", "staging"), default="binary")
    s.add_argument("--n-per-class", type=int, default=40)
    s.add_argument("--tremor", type=float, default=0.3, help="impaired-class tremor amplitude")
    s.add_argument("--healthy-tremor", type=float, default=0.0)
    s.add_argument("--ladder", default="0,0.1,0.25,0.5", help="staging tremor amplitudes")
    s.add_argument("--noise", type=float, default=SpiralParams.noise_std)
    s.add_argument("--tasks", default="spiral")
    s.add_argument("--validation", action="store_true", help="label as validation groups")
    s.add_argument("--id-prefix", default=None)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("extract", help="feature table from a cohort manifest")
    common(e, "feature table CSV")
    e.add_argument("--manifest", required=True)
    e.add_argument("--task", choices=("spiral", "sentence"), default="spiral")
    e.add_argument("--features", default="kinem,geom,nld", help="comma list of kinem, geom, nld")
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_extract)

    def table_cmd(name, helptext, func, out_help, classifier=False):
        c = sub.add_parser(name, help=helptext)
        common(c, out_help)
        c.add_argument("--features", required=True, help="feature table CSV")
        c.add_argument("--grid", default=None, help="e.g. 'c=0.1,1;gamma=0.01' (default: full grid)")
        c.add_argument("--no-standardize", action="store_true", help="feed raw features to KNN/SVM")
        if classifier:
            c.add_argument("--classifier", choices=("knn", "svm", "rf"), default="svm")
        c.set_defaults(func=func)
        return c

    table_cmd("evaluate", "LOOCV grid search on a binary feature table", cmd_evaluate, "report directory", True)
    table_cmd("relevance", "PCA relevance ranking and incremental curve", cmd_relevance, "output directory")
    table_cmd("stage", "four-class one-vs-all SVM under LOOCV", cmd_stage, "staging JSON path")

    v = sub.add_parser("validate", help="frozen hyperparameters on a separate validation table")
    common(v, "report JSON path")
    v.add_argument("--dev", required=True, help="development feature table")
    v.add_argument("--val", required=True, help="validation feature table")
    v.add_argument("--params", required=True, help="report.json from evaluate, or 'c=..,gamma=..'")
    v.add_argument("--classifier", choices=("knn", "svm", "rf"), default="svm")
    v.add_argument("--no-standardize", action="store_true")
    v.set_defaults(func=cmd_validate)
    return p


def _emit_error(exc: BaseException, code: int) -> int:
    msg = {"error": type(exc).__name__, "message": str(exc).replace("\n", " "), "exit": code}
    print(json.dumps(msg), file=sys.stderr)
    return code


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, CliError):
        return exc.code
    if isinstance(exc, ExtractionError):
        exc = exc.cause
    if isinstance(exc, NUMERIC_ERRORS):
        return EXIT_NUMERIC
    return EXIT_INPUT


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(merge_config(parser, argv))
        result = args.func(args)
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    except (CliError, ValueError, KeyError, OSError, json.JSONDecodeError, *NUMERIC_ERRORS) as exc:
        return _emit_error(exc, _exit_code(exc))
    print(to_json(result), end="")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Shared helpers for the experiment runners."""

import argparse
import json
import sys
import time

from pdwriting.evaluate import binary_dataset
from pdwriting.pipeline import extract_table
from pdwriting.synth import SpiralParams, generate_cohort


def parser(doc: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=doc.strip().splitlines()[0])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-per-class", type=int, default=40)
    p.add_argument("--features", default="kinem", help="comma list of kinem, geom, nld")
    p.add_argument("--out", default=None, help="optional JSON path")
    return p


def binary_cohort_dataset(n, tremor, seed, sets, healthy=0.0, **kw):
    base = SpiralParams()
    cohort = generate_cohort(n, base.replace(tremor_amp=healthy), base.replace(tremor_amp=tremor), seed=seed, **kw)
    return binary_dataset(extract_table(cohort, "spiral", sets.split(",")))


def emit(result: dict, out: str | None, t0: float) -> None:
    result["seconds"] = round(time.perf_counter() - t0, 2)
    text = json.dumps(result, indent=2, default=str)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    sys.stdout.write(text + "\n")

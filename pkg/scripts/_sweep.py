"""Shared driver: run one CLI experiment per alpha and collect the rows."""

from __future__ import annotations

import dataclasses
from pathlib import Path

from frakry.cli import ExperimentConfig, emit_convergence_table, run_experiment


def run_per_alpha(base: ExperimentConfig, alphas, outdir: Path, stem: str):
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for alpha in alphas:
        cfg = dataclasses.replace(base, alpha=alpha, out=outdir / f"{stem}_alpha{alpha}.csv")
        part = run_experiment(cfg)
        print(f"\n{stem}, alpha = {alpha}  ->  {cfg.out}")
        if base.experiment != "poles":
            print(emit_convergence_table(part))
        rows += part
    return rows

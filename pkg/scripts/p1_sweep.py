"""First backward-Euler step of the linear fractional heat equation on a
64x64 grid (dt = 1/64, polynomial bump initial data), Krylov error against
the oracle-stepped iterate for each method and k."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from _sweep import run_per_alpha

from frakry.cli import ExperimentConfig


@dataclass
class P1Sweep:
    nx: int = 64
    nt: int = 64
    mu: float = 1.0
    alphas: tuple = (1.2, 1.5, 1.8)
    k_list: tuple = (10, 15, 20, 25, 30)
    methods: tuple = ("jacobi", "poly", "extended", "shiftinvert")
    repeats: int = 5
    outdir: Path = field(default_factory=lambda: Path("results"))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeats", type=int, default=P1Sweep.repeats)
    p.add_argument("--outdir", type=Path, default=Path("results"))
    a = p.parse_args()
    cfg = P1Sweep(repeats=a.repeats, outdir=a.outdir)
    base = ExperimentConfig("heat2d", nx=cfg.nx, nt=cfg.nt, mu=cfg.mu, k_list=cfg.k_list, methods=cfg.methods, repeats=cfg.repeats)
    run_per_alpha(base, cfg.alphas, cfg.outdir, "heat2d")


if __name__ == "__main__":
    main()

"""Steady-state convergence sweep: every method against the spectral oracle
on the 1D FD Laplacian with a random right-hand side (the sin(pi x) data
is an eigenvector and converges at k = 1 for every method)."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from _sweep import run_per_alpha

from frakry.cli import ExperimentConfig


@dataclass
class StationarySweep:
    nx: int = 4096
    alphas: tuple = (1.2, 1.5, 1.8)
    k_list: tuple = (5, 10, 15, 20, 25, 30)
    methods: tuple = ("jacobi", "poly", "extended", "shiftinvert")
    seed: int = 0
    repeats: int = 5
    two_d: bool = False
    outdir: Path = field(default_factory=lambda: Path("results"))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nx", type=int, default=StationarySweep.nx)
    p.add_argument("--repeats", type=int, default=StationarySweep.repeats)
    p.add_argument("--two-d", action="store_true", help="64x64 grid with random RHS instead of 1D")
    p.add_argument("--outdir", type=Path, default=Path("results"))
    a = p.parse_args()
    cfg = StationarySweep(nx=a.nx if not a.two_d else 64, repeats=a.repeats, two_d=a.two_d, outdir=a.outdir)
    base = ExperimentConfig(
        "steady2d" if cfg.two_d else "compare",
        nx=cfg.nx,
        k_list=cfg.k_list,
        methods=cfg.methods,
        rhs="random",
        seed=cfg.seed,
        repeats=cfg.repeats,
    )
    run_per_alpha(base, cfg.alphas, cfg.outdir, "steady2d" if cfg.two_d else "steady1d")


if __name__ == "__main__":
    main()

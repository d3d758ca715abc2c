"""k-sweep for the Dirichlet fractional Allen-Cahn run (80x80 grid,
dt = 1e-2, mu = 1e-3, 400 IMEX steps).  rel_error is the worst per-step
Krylov-vs-oracle error over the trajectory; this is the sweep the
acceptance threshold for k = 20 was frozen from.

Set FRAKRY_THREADS to run the k cells in parallel."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from _sweep import run_per_alpha

from frakry.cli import ExperimentConfig


@dataclass
class AllenCahnSweep:
    nx: int = 80
    nt: int = 400
    dt: float = 1e-2
    mu: float = 1e-3
    alphas: tuple = (1.2, 1.5, 1.8)
    k_list: tuple = (5, 10, 15, 20, 25, 30)
    repeats: int = 1
    outdir: Path = field(default_factory=lambda: Path("results"))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nt", type=int, default=AllenCahnSweep.nt)
    p.add_argument("--outdir", type=Path, default=Path("results"))
    a = p.parse_args()
    cfg = AllenCahnSweep(nt=a.nt, outdir=a.outdir)
    base = ExperimentConfig(
        "allencahn2d", nx=cfg.nx, nt=cfg.nt, dt=cfg.dt, mu=cfg.mu, k_list=cfg.k_list, methods=("jacobi",), repeats=cfg.repeats
    )
    rows = run_per_alpha(base, cfg.alphas, cfg.outdir, "allencahn2d")
    at20 = max(r.rel_error for r in rows if r.k == 20)
    print(f"\nworst per-step error at k = 20 across alphas: {at20:.3e}")


if __name__ == "__main__":
    main()

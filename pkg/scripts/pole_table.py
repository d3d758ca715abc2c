"""Pole tables for the fractional resolvent on the 1D grid with n = 4096,
alpha = 1.2, nu = 1/(n+1) and k in {10, 20, 30}."""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

from _sweep import run_per_alpha

from frakry.cli import ExperimentConfig


@dataclass
class PoleTable:
    nx: int = 4096
    alphas: tuple = (1.2,)
    k_list: tuple = (10, 20, 30)
    nu: float | None = None  # default 1/(nx+1)
    outdir: Path = field(default_factory=lambda: Path("results"))


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nu", type=float)
    p.add_argument("--outdir", type=Path, default=Path("results"))
    a = p.parse_args()
    cfg = PoleTable(nu=a.nu, outdir=a.outdir)
    base = ExperimentConfig("poles", nx=cfg.nx, k_list=cfg.k_list, nu=cfg.nu)
    rows = run_per_alpha(base, cfg.alphas, cfg.outdir, "poles")
    for k in cfg.k_list:
        xi = [r.xi for r in rows if r.k == k]
        print(f"k={k:2d}: xi_1 = {xi[0]:.6e}, xi_k = {xi[-1]:.6e}")


if __name__ == "__main__":
    main()

"""Experiment harness: sweeps over (method, k) with errors measured against
the exact spectral oracle, written as CSV.

Usage::

    frakry --experiment steady1d --alpha 1.2 --nx 4096 --k 5,10,20,30 --rhs random
    frakry poles --alpha 1.2 --nx 4096 --k 10,20,30
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .discretize import GridProblem, Rhs, fd_laplacian, sample_rhs, spectral_oracle_apply
from .krylov import Method, shift_invert_pole
from .poles import FracResolvent, InverseFracPower, make_pole_set
from .solvers import SteppingScheme, run_allen_cahn, solve_steady, step_linear

log = logging.getLogger("frakry")

EXPERIMENTS = ("steady1d", "steady2d", "heat2d", "allencahn2d", "poles", "compare")
RESULT_HEADER = ("experiment", "method", "alpha", "k", "n", "rel_error", "wall_time_s", "tau", "nu")
POLE_HEADER = ("j", "xi_j", "target", "alpha", "k", "nu", "tau")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "steady1d"
    alpha: float = 1.5
    nx: int | None = None
    ny: int | None = None
    nt: int | None = None
    k_list: tuple = (10, 15, 20, 25, 30)
    methods: tuple = ("jacobi", "poly", "extended", "shiftinvert")
    mu: float | None = None
    dt: float | None = None
    nu: float | None = None
    seed: int = 0
    repeats: int = 5
    rhs: str | None = None
    target: str = "resolvent"
    out: Path | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise UsageError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        self.k_list = tuple(int(k) for k in self.k_list)
        self.methods = tuple(Method(m).value for m in self.methods) if self.methods else ()
        if not self.k_list or min(self.k_list) < 1:
            raise UsageError("--k needs positive integers")
        if not self.methods:
            raise UsageError("--method needs at least one method")
        if not 1 < self.alpha <= 2:
            raise UsageError(f"--alpha must lie in (1, 2], got {self.alpha}")
        if self.alpha == 2 and self.experiment == "poles":
            raise UsageError("alpha = 2 has no fractional poles")
        if self.repeats < 1:
            raise UsageError("--repeats must be >= 1")
        defaults = {
            "steady1d": dict(nx=4096),
            "compare": dict(nx=4096),
            "poles": dict(nx=4096),
            "steady2d": dict(nx=64),
            "heat2d": dict(nx=64, nt=64, mu=1.0),
            "allencahn2d": dict(nx=80, nt=400, mu=1e-3, dt=1e-2),
        }[self.experiment]
        for key, val in defaults.items():
            if getattr(self, key) is None:
                setattr(self, key, val)
        if self.ny is None:
            self.ny = self.nx
        if self.experiment == "heat2d" and self.dt is None:
            self.dt = 1.0 / self.nt
        if self.rhs is None:
            self.rhs = "random" if self.experiment == "compare" else "sin"
        if self.rhs not in ("sin", "random"):
            raise UsageError(f"--rhs must be 'sin' or 'random', got {self.rhs!r}")
        if self.target not in ("resolvent", "inverse"):
            raise UsageError(f"--target must be 'resolvent' or 'inverse', got {self.target!r}")
        for name in ("nx", "ny", "nt"):
            val = getattr(self, name)
            if val is not None and val < 1:
                raise UsageError(f"--{name} must be >= 1")
        for name in ("mu", "dt", "nu"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise UsageError(f"--{name} must be positive")

    @property
    def is_2d(self) -> bool:
        return self.experiment in ("steady2d", "heat2d", "allencahn2d")

    def grid(self) -> GridProblem:
        if self.is_2d:
            return GridProblem.square(self.nx, self.ny, alpha=self.alpha)
        return GridProblem.line(self.nx, alpha=self.alpha)


@dataclass
class ResultRow:
    experiment: str
    method: str
    alpha: float
    k: int
    n: int
    rel_error: float
    wall_time_s: float
    tau: float = math.nan
    nu: float = math.nan
    status: str = field(default="ok", compare=False)

    def as_csv(self) -> list[str]:
        return [
            self.experiment,
            self.method,
            _fmt(self.alpha),
            str(self.k),
            str(self.n),
            _fmt(self.rel_error),
            _fmt(self.wall_time_s),
            _fmt(self.tau),
            _fmt(self.nu),
        ]

    @classmethod
    def from_csv(cls, rec: dict) -> "ResultRow":
        return cls(
            rec["experiment"],
            rec["method"],
            float(rec["alpha"]),
            int(rec["k"]),
            int(rec["n"]),
            float(rec["rel_error"]),
            float(rec["wall_time_s"]),
            float(rec["tau"]) if rec["tau"] else math.nan,
            float(rec["nu"]) if rec["nu"] else math.nan,
        )


@dataclass
class PoleRow:
    j: int
    xi: float
    target: str
    alpha: float
    k: int
    nu: float
    tau: float

    def as_csv(self) -> list[str]:
        return [str(self.j), _fmt(self.xi), self.target, _fmt(self.alpha), str(self.k), _fmt(self.nu), _fmt(self.tau)]


def _fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{x:.17g}"


def _rel(u, ref) -> float:
    return float(np.linalg.norm(u - ref) / np.linalg.norm(ref))


class _Problem:
    """Operator, input and exact reference for one experiment."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.gp = cfg.grid()
        self.A = fd_laplacian(self.gp)
        self.nu = math.nan
        exp = cfg.experiment
        if exp in ("steady1d", "steady2d", "compare"):
            if cfg.rhs == "random":
                self.v = np.random.default_rng(cfg.seed).standard_normal(self.gp.n)
            else:
                self.v = sample_rhs(self.gp, Rhs.SIN1D if self.gp.dimension == 1 else Rhs.SIN2D)
            self.target = InverseFracPower(cfg.alpha)
            self.ref = spectral_oracle_apply(self.gp, self.target, self.v)
        elif exp == "heat2d":
            self.scheme = SteppingScheme("backward_euler", cfg.mu, cfg.dt)
            self.nu = self.scheme.nu
            self.v = sample_rhs(self.gp, Rhs.POLY_BUMP2D)
            self.target = FracResolvent(cfg.alpha, self.nu)
            self.ref = spectral_oracle_apply(self.gp, self.target, self.v)
        else:
            self.scheme = SteppingScheme("imex_backward_euler", cfg.mu, cfg.dt)
            self.nu = self.scheme.nu
            self.v = sample_rhs(self.gp, Rhs.ALLEN_CAHN_INIT2D)
            self.target = FracResolvent(cfg.alpha, self.nu)

    def tau(self, method: str, k: int) -> float:
        if method == "shiftinvert":
            return shift_invert_pole(self.A)
        if method != "jacobi" or self.cfg.alpha == 2:
            return math.nan
        return make_pole_set(self.target, k, self.A.lambda_min, self.A.lambda_max).tau

    def run(self, method: str, k: int):
        """One evaluation; returns (output, error vs oracle)."""
        exp = self.cfg.experiment
        if exp in ("steady1d", "steady2d", "compare"):
            y = solve_steady(self.gp, self.v, method, k, A=self.A)
            return y, _rel(y, self.ref)
        if exp == "heat2d":
            y = step_linear(self.gp, self.scheme, self.v, None, method, k, A=self.A)
            return y, _rel(y, self.ref)
        res = run_allen_cahn(self.gp, self.scheme, self.v, self.cfg.nt, method, k, A=self.A, track_oracle=True)
        return res.trajectory[-1], float(res.step_errors.max())


def _run_poles(cfg: ExperimentConfig) -> list[PoleRow]:
    gp = cfg.grid()
    A = fd_laplacian(gp)
    nu = cfg.nu if cfg.nu is not None else 1.0 / (gp.n + 1)
    rows = []
    for k in cfg.k_list:
        if cfg.target == "resolvent":
            target = FracResolvent(cfg.alpha, nu)
        else:
            target, nu = InverseFracPower(cfg.alpha), math.nan
        ps = make_pole_set(target, k, A.lambda_min, A.lambda_max)
        rows += [PoleRow(j + 1, float(x), cfg.target, cfg.alpha, k, nu, ps.tau) for j, x in enumerate(ps.xi)]
    return rows


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FRAKRY_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(cfg: ExperimentConfig):
    """Run every (method, k) cell of ``cfg``; writes ``cfg.out`` when set.

    Errors are computed first (in parallel up to ``FRAKRY_THREADS``), then
    every cell is timed sequentially, averaging ``cfg.repeats`` runs.
    """
    if cfg.experiment == "poles":
        rows = _run_poles(cfg)
        if cfg.out is not None:
            write_csv(cfg.out, POLE_HEADER, rows)
        return rows

    prob = _Problem(cfg)
    cells = [(m, k) for m in cfg.methods for k in cfg.k_list]

    def error_cell(cell):
        method, k = cell
        try:
            _, err = prob.run(method, k)
            return err, "ok"
        except Exception as exc:  # a failed cell must not abort the sweep
            log.warning("cell %s k=%d failed: %s: %s", method, k, type(exc).__name__, exc)
            return math.nan, type(exc).__name__

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        outcomes = list(pool.map(error_cell, cells))

    rows = []
    for (method, k), (err, status) in zip(cells, outcomes):
        wall = math.nan
        tau = math.nan
        if status == "ok":
            times = []
            for _ in range(cfg.repeats):
                t0 = time.perf_counter()
                prob.run(method, k) if cfg.experiment != "allencahn2d" else _time_allen_cahn(prob, method, k)
                times.append(time.perf_counter() - t0)
            wall = float(np.mean(times))
            tau = prob.tau(method, k)
        rows.append(ResultRow(cfg.experiment, method, cfg.alpha, k, prob.gp.n, err, wall, tau, prob.nu, status))
    if cfg.out is not None:
        write_csv(cfg.out, RESULT_HEADER, rows)
    return rows


def _time_allen_cahn(prob: _Problem, method, k):
    # timed without the oracle bookkeeping
    return run_allen_cahn(prob.gp, prob.scheme, prob.v, prob.cfg.nt, method, k, A=prob.A)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r.as_csv())


def read_results(path) -> list[ResultRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [ResultRow.from_csv(rec) for rec in csv.DictReader(fh)]


_METHOD_ORDER = {m.value: i for i, m in enumerate(Method)}


def emit_convergence_table(rows) -> str:
    """Plain-text table grouped by method, k ascending within each group."""
    lines = [f"{'method':<12} {'k':>4} {'rel_error':>12} {'wall_time_s':>12}"]
    ordered = sorted(rows, key=lambda r: (_METHOD_ORDER.get(r.method, len(_METHOD_ORDER)), r.method, r.k))
    for r in ordered:
        err = f"{r.rel_error:12.4e}" if r.status == "ok" else f"{r.status:>12}"
        lines.append(f"{r.method:<12} {r.k:>4d} {err} {r.wall_time_s:12.4e}")
    return "\n".join(lines)


def _csv_list(text, conv):
    return tuple(conv(t) for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frakry", description=__doc__.split("\n\n")[0])
    p.add_argument("experiment_pos", nargs="?", choices=EXPERIMENTS, metavar="EXPERIMENT", help="same as --experiment")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--nt", type=int)
    p.add_argument("--k", default="10,15,20,25,30", help="comma list of subspace dimensions")
    p.add_argument("--method", default="jacobi,poly,extended,shiftinvert", help="comma list")
    p.add_argument("--mu", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--nu", type=float, help="poles experiment only; default 1/(n+1)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--rhs", choices=("sin", "random"))
    p.add_argument("--target", choices=("resolvent", "inverse"), default="resolvent")
    p.add_argument("--out", type=Path)
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def config_from_args(args) -> ExperimentConfig:
    experiment = args.experiment or args.experiment_pos
    if experiment is None:
        raise UsageError("an experiment is required")
    try:
        k_list = _csv_list(args.k, int)
        methods = _csv_list(args.method, str)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        return ExperimentConfig(
            experiment=experiment,
            alpha=args.alpha,
            nx=args.nx,
            ny=args.ny,
            nt=args.nt,
            k_list=k_list,
            methods=methods,
            mu=args.mu,
            dt=args.dt,
            nu=args.nu,
            seed=args.seed,
            repeats=args.repeats,
            rhs=args.rhs,
            target=args.target,
            out=args.out,
        )
    except UsageError:
        raise
    except ValueError as exc:  # e.g. unknown method name
        raise UsageError(str(exc)) from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"frakry: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rows = run_experiment(cfg)
    if cfg.experiment == "poles":
        if not args.quiet:
            for r in rows:
                print(f"k={r.k:3d} j={r.j:3d} xi={r.xi:.12e}")
        return EXIT_OK
    if not args.quiet:
        print(emit_convergence_table(rows))
    if rows and all(r.status != "ok" for r in rows):
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

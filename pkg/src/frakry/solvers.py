"""Steady and time-dependent fractional diffusion drivers.

Time stepping is restricted to one-step schemes: backward Euler for the
linear problem and IMEX backward Euler (implicit diffusion, explicit
reaction) for Allen-Cahn.  Each step is one evaluation of
``(I + nu A^{alpha/2})^{-1}`` on a vector.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .discretize import GridProblem, fd_laplacian, spectral_oracle_apply
from .krylov import Method, SpdOperator, apply_matrix_function
from .poles import FracResolvent, InverseFracPower, make_pole_set


class Scheme(str, enum.Enum):
    BACKWARD_EULER = "backward_euler"
    IMEX_BACKWARD_EULER = "imex_backward_euler"


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    T: float
    nt: int

    def __post_init__(self):
        if not self.T > self.t0:
            raise ValueError(f"need T > t0, got [{self.t0}, {self.T}]")
        if self.nt < 1:
            raise ValueError(f"need nt >= 1, got {self.nt}")

    @property
    def delta_t(self) -> float:
        return (self.T - self.t0) / self.nt

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.delta_t * np.arange(self.nt + 1)


@dataclass(frozen=True)
class SteppingScheme:
    """One-step LMM/IMEX data.

    For backward Euler the step coefficients are ``alpha_l = beta_l = 1``
    and ``gamma_0 = 1``, so ``nu = delta_t * mu``.
    """

    tag: Scheme
    mu: float
    delta_t: float
    alpha_coeffs: tuple = (-1.0, 1.0)
    beta_coeffs: tuple = (0.0, 1.0)
    gamma_coeffs: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "tag", Scheme(self.tag))
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")

    @property
    def nu(self) -> float:
        return self.delta_t * self.mu * self.beta_coeffs[-1] / self.alpha_coeffs[-1]


def _operator(gp: GridProblem, A: SpdOperator | None) -> SpdOperator:
    return fd_laplacian(gp) if A is None else A


def solve_steady(gp: GridProblem, rhs, method: Method | str = Method.JACOBI, k: int = 10, A=None) -> np.ndarray:
    """Approximate ``A^{-alpha/2} rhs``; alpha = 2 is a single direct solve."""
    A = _operator(gp, A)
    if gp.alpha == 2:
        return A.solve_shifted(0.0, rhs)
    return apply_matrix_function(A, rhs, InverseFracPower(gp.alpha), method, k)


def resolvent_step(A: SpdOperator, alpha: float, nu: float, y, method, k) -> np.ndarray:
    """``(I + nu A^{alpha/2})^{-1} y``.

    For alpha = 2 this is ``(1/nu) (I/nu + A)^{-1} y``, computed by one
    banded solve instead of a rational approximation.
    """
    if alpha == 2:
        return A.solve_shifted(1.0 / nu, y) / nu
    target = FracResolvent(alpha, nu)
    poles = make_pole_set(target, k, A.lambda_min, A.lambda_max) if Method(method) is Method.JACOBI else None
    return apply_matrix_function(A, y, target, method, k, poles=poles)


def step_linear(gp, scheme: SteppingScheme, state, source=None, method=Method.JACOBI, k=10, A=None) -> np.ndarray:
    A = _operator(gp, A)
    y = np.asarray(state, dtype=float)
    if source is not None:
        y = y + scheme.delta_t * np.asarray(source, dtype=float)
    return resolvent_step(A, gp.alpha, scheme.nu, y, method, k)


def run_linear_evolution(gp, scheme: SteppingScheme, u0, tg: TimeGrid, method=Method.JACOBI, k=10, A=None, source=None):
    """Backward Euler trajectory, shape (nt + 1, n).

    ``source`` may be None, a fixed vector, or a callable ``s(t)``.
    """
    A = _operator(gp, A)
    traj = np.zeros((tg.nt + 1, gp.n))
    traj[0] = u0
    times = tg.times
    for m in range(tg.nt):
        s = source(times[m + 1]) if callable(source) else source
        traj[m + 1] = step_linear(gp, scheme, traj[m], s, method, k, A=A)
    return traj


def allen_cahn_reaction(u):
    """s(u) = -(u^3 - u)"""
    return -(u**3 - u)


def imex_rhs(scheme: SteppingScheme, state) -> np.ndarray:
    """State after the explicit reaction half of the IMEX step."""
    state = np.asarray(state, dtype=float)
    if not np.all(np.isfinite(state)):
        raise ValueError("state contains non-finite values")
    return state + scheme.delta_t * scheme.gamma_coeffs[0] * allen_cahn_reaction(state)


def step_imex_allen_cahn(gp, scheme: SteppingScheme, state, method=Method.JACOBI, k=10, A=None) -> np.ndarray:
    A = _operator(gp, A)
    return resolvent_step(A, gp.alpha, scheme.nu, imex_rhs(scheme, state), method, k)


@dataclass
class AllenCahnRun:
    trajectory: np.ndarray
    step_errors: np.ndarray = field(default_factory=lambda: np.zeros(0))


def run_allen_cahn(gp, scheme: SteppingScheme, u0, nt: int, method=Method.JACOBI, k=10, A=None, track_oracle=False):
    """IMEX backward Euler for the fractional Allen-Cahn equation.

    With ``track_oracle`` each step is also evaluated exactly from the same
    input state and the per-step relative error is recorded.
    """
    A = _operator(gp, A)
    traj = np.zeros((nt + 1, gp.n))
    traj[0] = u0
    errs = np.zeros(nt)
    target = FracResolvent(gp.alpha, scheme.nu)
    for m in range(nt):
        traj[m + 1] = step_imex_allen_cahn(gp, scheme, traj[m], method, k, A=A)
        if track_oracle:
            ref = spectral_oracle_apply(gp, target, imex_rhs(scheme, traj[m]))
            nref = np.linalg.norm(ref)
            errs[m] = np.linalg.norm(traj[m + 1] - ref) / nref if nref else np.linalg.norm(traj[m + 1])
    return AllenCahnRun(traj, errs if track_oracle else np.zeros(0))


"""Rational Krylov evaluation of fractional matrix functions with
Gauss-Jacobi poles, and FD fractional diffusion solvers built on it."""

from .discretize import GridProblem, fd_laplacian, sample_rhs, spectral_oracle_apply
from .krylov import DenseSpd, Method, SpdOperator, apply_matrix_function
from .poles import FracResolvent, InverseFracPower, make_pole_set
from .solvers import SteppingScheme, TimeGrid, solve_steady, step_imex_allen_cahn, step_linear

__version__ = "0.1.0"

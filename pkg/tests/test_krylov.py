import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import dense_function, dense_laplacian_1d, random_spd

from frakry.discretize import GridProblem, fd_laplacian, sample_rhs, spectral_oracle_apply
from frakry.krylov import (
    DenseSpd,
    KrylovBasis,
    Method,
    SpectralLeakError,
    apply_matrix_function,
    build_basis,
    extended_krylov_basis,
    polynomial_krylov_basis,
    projected_matrix,
    rational_arnoldi,
    rational_closed_form,
    shift_invert_basis,
    shift_invert_pole,
)
from frakry.poles import FracResolvent, InverseFracPower, make_pole_set

METHODS = [m.value for m in Method]


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def basis_for(A, v, method, k, target=None):
    target = target or InverseFracPower(1.5)
    poles = make_pole_set(target, k, A.lambda_min, A.lambda_max) if method == "jacobi" else None
    return build_basis(A, v, method, k, poles)


def orth_err(B):
    return np.abs(B.V.T @ B.V - np.eye(B.m)).max()


@pytest.fixture(scope="module")
def fd64():
    return fd_laplacian(GridProblem.line(64, 1.5))


def test_operator_contracts(fd64):
    rng = np.random.default_rng(3)
    for _ in range(10):
        x, y = rng.standard_normal((2, 64))
        a, b = rng.standard_normal(2)
        np.testing.assert_allclose(fd64.matvec(a * x + b * y), a * fd64.matvec(x) + b * fd64.matvec(y), atol=1e-9)
    assert 0 < fd64.lambda_min <= fd64.lambda_max
    for xi in (0.0, 1.0, 1e4):
        b = rng.standard_normal(64)
        x = fd64.solve_shifted(xi, b)
        assert np.linalg.norm(xi * x + fd64.matvec(x) - b) <= 1e-12 * np.linalg.norm(b) * (1 + fd64.lambda_max / (xi + fd64.lambda_min))
    with pytest.raises(ValueError):
        fd64.solve_shifted(-1.0, b)


@pytest.mark.parametrize("method", METHODS)
def test_eigenvector_seed_breaks_down_at_once(method):
    # an exactly representable eigenvector; for FD eigenvectors the rounding
    # in A v or the solve is ~eps * cond(A), which can sit above the 1e-14
    # breakdown threshold (the result is still exact, see the invariance test)
    A = DenseSpd(np.diag(np.arange(1.0, 9.0)))
    B = basis_for(A, np.eye(8)[3], method, 6)
    assert B.m == 1 and B.exact


@pytest.mark.parametrize("method", METHODS)
def test_identity_operator_breaks_down(method):
    A = DenseSpd(np.eye(5))
    B = basis_for(A, np.arange(1.0, 6.0), method, 4)
    assert B.m == 1 and B.exact


def test_zero_seed_rejected(fd64):
    for build in (polynomial_krylov_basis, extended_krylov_basis, shift_invert_basis):
        with pytest.raises(ValueError):
            build(fd64, np.zeros(64), 4)
    with pytest.raises(ValueError):
        rational_arnoldi(fd64, np.zeros(64), [1.0, 2.0])


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize("n", [64, 256])
def test_orthonormality_suite(method, n):
    A = fd_laplacian(GridProblem.line(n, 1.5))
    v = np.random.default_rng(n).standard_normal(n)
    for k in (1, 5, 10, 20):
        B = basis_for(A, v, method, k)
        assert B.m <= k
        assert orth_err(B) <= 1e-10


def test_solve_counts(fd64):
    v = np.random.default_rng(0).standard_normal(64)
    for k in (1, 2, 5, 10):
        fd64.n_solves = 0
        extended_krylov_basis(fd64, v, k)
        assert fd64.n_solves == k // 2
        fd64.n_solves = 0
        shift_invert_basis(fd64, v, k)
        assert fd64.n_solves == k


def test_shift_invert_pole():
    A = DenseSpd(np.diag([1.0, 100.0]))
    assert shift_invert_pole(A) == pytest.approx(10.0)


def test_rational_identity_with_residual_term(fd64):
    v = np.random.default_rng(11).standard_normal(64)
    B = basis_for(fd64, v, "jacobi", 10)
    S = projected_matrix(B, fd64, check=False)
    C = rational_closed_form(B, fd64)
    assert np.abs(S - C).max() <= 1e-8 * np.abs(S).max()


def test_projected_matrix_examples(fd64):
    v = sample_rhs(GridProblem.line(64, 1.5), "sin1d")
    B = rational_arnoldi(fd64, v, [3.0])
    S = projected_matrix(B, fd64)
    assert S[0, 0] == pytest.approx(fd64.lambda_min, rel=1e-13)

    A = DenseSpd(np.diag([1.0, 2.0, 3.0, 4.0]))
    V = np.eye(4)[:, [1, 3]]
    B = KrylovBasis(V, np.zeros((3, 2)), Method.POLY, 1.0)
    np.testing.assert_array_equal(projected_matrix(B, A), np.diag([2.0, 4.0]))


@pytest.mark.parametrize("method", METHODS)
def test_two_by_two_exact(method):
    A = DenseSpd(np.diag([1.0, 4.0]))
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    y = apply_matrix_function(A, v, InverseFracPower(1.0), method, k=2)
    np.testing.assert_allclose(y, np.array([1.0, 0.5]) / np.sqrt(2), rtol=1e-12)


@pytest.mark.parametrize("method", METHODS)
def test_extended_full_space_any_function(method):
    A = DenseSpd(np.diag([1.0, 2.0]))
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    for target in (InverseFracPower(1.3), FracResolvent(1.7, 0.3)):
        y = apply_matrix_function(A, v, target, method, k=2)
        np.testing.assert_allclose(y, target(np.array([1.0, 2.0])) * v, rtol=1e-12)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.sampled_from(METHODS), st.floats(1.1, 1.9), st.floats(1e-3, 10.0))
def test_full_dimension_exactness(n, seed, method, alpha, nu):
    rng = np.random.default_rng(seed)
    M = random_spd(n, rng, cond=float(rng.uniform(1.5, 1e3)))
    A = DenseSpd(M)
    v = rng.standard_normal(n)
    for target in (InverseFracPower(alpha), FracResolvent(alpha, nu)):
        y = apply_matrix_function(A, v, target, method, k=n)
        assert rel(y, dense_function(M, target, v)) <= 1e-10


@given(st.integers(1, 63), st.sampled_from(METHODS), st.integers(1, 20), st.floats(1.1, 1.9))
def test_eigenvector_invariance(mode, method, k, alpha):
    gp = GridProblem.line(64, alpha)
    A = fd_laplacian(gp)
    v = np.sin(mode * np.pi * np.arange(1, 65) / 65)
    lam = A.eigenvalues()[mode - 1]
    for target in (InverseFracPower(alpha), FracResolvent(alpha, 0.01)):
        y = apply_matrix_function(A, v, target, method, k)
        assert rel(y, target(lam) * v) <= 1e-12


def test_zero_vector_maps_to_zero(fd64):
    y = apply_matrix_function(fd64, np.zeros(64), InverseFracPower(1.5), "jacobi", 5)
    assert not y.any()


def test_spectral_leak_detected():
    M = np.diag([1.0, 2.0, 10.0])
    A = DenseSpd(M, lambda_min=1.0, lambda_max=5.0)
    with pytest.raises(SpectralLeakError):
        apply_matrix_function(A, np.ones(3), InverseFracPower(1.5), "poly", 3)


def fd_errors(gp, target, method, ks, seed=0):
    A = fd_laplacian(gp)
    v = np.random.default_rng(seed).standard_normal(gp.n)
    v /= np.linalg.norm(v)
    ref = spectral_oracle_apply(gp, target, v)
    return [rel(apply_matrix_function(A, v, target, method, k), ref) for k in ks]


@pytest.mark.parametrize("method", METHODS)
@pytest.mark.parametrize(
    "gp, target",
    [
        (GridProblem.line(1024, 1.5), InverseFracPower(1.5)),
        (GridProblem.square(32, alpha=1.5), InverseFracPower(1.5)),
        (GridProblem.square(32, alpha=1.5), FracResolvent(1.5, 1 / 64)),
    ],
    ids=["1d-power", "2d-power", "2d-resolvent"],
)
def test_monotone_trend(gp, target, method):
    errs = fd_errors(gp, target, method, [5, 10, 15, 20, 25, 30, 35])
    assert max(b / a for a, b in zip(errs, errs[1:])) <= 10, errs


@pytest.mark.xfail(strict=True, reason="measured drop is 1.25 orders (1.2e-2 -> 6.7e-4); see decisions ledger")
def test_jacobi_two_orders_k10_to_k30_on_4096():
    e10, e30 = fd_errors(GridProblem.line(4096, 1.2), InverseFracPower(1.2), "jacobi", [10, 30])
    assert e30 <= 1e-2 * e10


def test_concurrent_calls_share_operator():
    gp = GridProblem.square(24, alpha=1.5)
    A = fd_laplacian(gp)
    rng = np.random.default_rng(5)
    vs = rng.standard_normal((8, gp.n))
    target = FracResolvent(1.5, 0.01)
    serial = [apply_matrix_function(A, v, target, "jacobi", 12) for v in vs]
    A.clear_cache()
    out = [None] * len(vs)

    def work(i):
        out[i] = apply_matrix_function(A, vs[i], target, "jacobi", 12)

    threads = [threading.Thread(target=work, args=(i,)) for i in range(len(vs))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for a, b in zip(serial, out):
        np.testing.assert_array_equal(a, b)


def test_dense_fd_matches_oracle(fd64):
    v = np.random.default_rng(2).standard_normal(64)
    M = dense_laplacian_1d(64)
    target = InverseFracPower(1.5)
    np.testing.assert_allclose(spectral_oracle_apply(GridProblem.line(64, 1.5), target, v), dense_function(M, target, v), rtol=1e-10)

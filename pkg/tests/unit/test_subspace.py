"""
"""

import numpy as np
import pytest

from ksd.curvature import CurvatureKind, CurvatureOperator
from ksd.exceptions import DegenerateCurvature, InvalidInput, NumericalOverflow, ZeroGradient
from ksd.linalg import cholesky
from ksd.network import gradient
from ksd.optimizers import preconditioned_cg
from ksd.subspace import (
    Preconditioner,
    build_basis,
    floor_eigenvalues,
    rotate_basis,
)


def explicit(matrix: np.ndarray):
    return lambda v: matrix @ v


def test_preconditioner_from_fisher_floors() -> None:

    precond = Preconditioner.from_fisher(np.array([0.0, 1e-9, 2.0, 4.0]), 1e-4)

    assert np.allclose(precond.d, [4e-4, 4e-4, 2.0, 4.0])
    assert precond.d.min() >= 1e-4 * precond.d.max()


def test_preconditioner_from_fisher_all_zero() -> None:

    with pytest.raises(DegenerateCurvature):
        Preconditioner.from_fisher(np.zeros(3))


def test_preconditioner_rejects_nonpositive() -> None:

    with pytest.raises(InvalidInput):
        Preconditioner(np.array([1.0, 0.0]))


def test_build_basis_two_dimensional_example() -> None:

    basis = build_basis(
        explicit(np.diag([1.0, 2.0])),
        np.array([1.0, 1.0]),
        Preconditioner.identity(2),
        K=2,
        d_prev=np.array([1.0, 0.0]),
    )

    # the previous step is already in the span, so the basis stops at 2
    assert basis.dim == 2
    assert np.allclose(basis.V[:, 0], np.array([1.0, 1.0]) / np.sqrt(2))
    assert np.allclose(basis.V[:, 1], np.array([-1.0, 1.0]) / np.sqrt(2))
    assert np.allclose(basis.H_bar, [[1.5, 0.5], [0.5, 1.5]])


def test_build_basis_identity_curvature_replaces_column(rng) -> None:

    g = rng.standard_normal(6)
    d_prev = rng.standard_normal(6)

    basis = build_basis(explicit(np.eye(6)), g, Preconditioner.identity(6), 3, d_prev)

    assert basis.dim == 4
    assert basis.replaced == [1, 2]
    assert np.allclose(basis.V.T @ basis.V, np.eye(4), atol=1e-12)
    assert np.allclose(basis.H_bar, np.eye(4), atol=1e-12)


def test_build_basis_replacement_is_deterministic(rng) -> None:

    g = rng.standard_normal(6)
    d_prev = rng.standard_normal(6)

    a = build_basis(explicit(np.eye(6)), g, Preconditioner.identity(6), 3, d_prev, seed=9)
    b = build_basis(explicit(np.eye(6)), g, Preconditioner.identity(6), 3, d_prev, seed=9)

    assert np.array_equal(a.V, b.V)


@pytest.mark.parametrize("kind", list(CurvatureKind))
def test_build_basis_reduced_curvature(kind, tiny_problem, rng) -> None:

    spec, theta, batch = tiny_problem
    operator = CurvatureOperator(spec, theta, batch, kind, 1e-3)
    g = gradient(spec, theta, batch, 1e-3)
    precond = Preconditioner(rng.uniform(0.5, 2.0, spec.num_params))

    basis = build_basis(operator, g, precond, 5, rng.standard_normal(spec.num_params))
    B = CurvatureOperator(spec, theta, batch, kind, 1e-3).explicit()

    assert basis.dim == 6
    assert operator.calls == 6
    assert np.max(np.abs(basis.V.T @ basis.V - np.eye(6))) < 1e-8
    assert np.allclose(basis.H_bar, basis.V.T @ B @ basis.V, rtol=1e-8, atol=1e-12)
    assert np.array_equal(basis.H_bar, basis.H_bar.T)


def test_build_basis_first_column_is_preconditioned_gradient(rng) -> None:

    g = rng.standard_normal(8)
    d = rng.uniform(0.5, 3.0, 8)
    M = rng.standard_normal((8, 8))

    basis = build_basis(explicit(M @ M.T), g, Preconditioner(d), 3, rng.standard_normal(8))

    expected = (g / d) / np.linalg.norm(g / d)
    assert np.allclose(basis.V[:, 0], expected)


def test_build_basis_zero_gradient() -> None:

    with pytest.raises(ZeroGradient):
        build_basis(explicit(np.eye(3)), np.zeros(3), Preconditioner.identity(3), 2, np.ones(3))


def test_build_basis_non_finite_product(rng) -> None:

    with pytest.raises(NumericalOverflow):
        build_basis(
            lambda v: np.full_like(v, np.nan),
            rng.standard_normal(3),
            Preconditioner.identity(3),
            2,
            np.ones(3),
        )


@pytest.mark.parametrize("lam", [0.0, 0.01, 0.1, 1.0, 10.0])
def test_cg_solution_lies_in_span(lam) -> None:

    rng = np.random.default_rng(42)
    M = rng.standard_normal((30, 30))
    B = M @ M.T / 30 + 0.1 * np.eye(30)
    g = rng.standard_normal(30)
    precond = Preconditioner(rng.uniform(0.5, 2.0, 30))
    K = 6

    basis = build_basis(explicit(B), g, precond, K, rng.standard_normal(30))
    damped = B + lam * np.diag(precond.d)
    x = preconditioned_cg(explicit(damped), -g, None, precond, K, 0.0).solution

    residual = x - basis.V @ (basis.V.T @ x)
    assert np.linalg.norm(residual) < 1e-8 * np.linalg.norm(x)


def test_floor_eigenvalues_inactive(rng) -> None:

    m = rng.standard_normal((5, 5))
    m = m @ m.T + 5 * np.eye(5)

    assert np.allclose(floor_eigenvalues(m, 1e-4), m, rtol=1e-10, atol=1e-10)


def test_floor_eigenvalues_examples() -> None:

    assert np.allclose(floor_eigenvalues(np.diag([1.0, -1.0]), 1e-4), np.diag([1.0, 1e-4]))
    assert np.allclose(floor_eigenvalues(np.eye(3), 1e-4), np.eye(3))


def test_floor_eigenvalues_no_positive_eigenvalue() -> None:

    floored = floor_eigenvalues(np.diag([-2.0, -1.0]), 1e-4)

    assert np.allclose(floored, np.diag([2e-4, 2e-4]))


def test_floor_eigenvalues_zero_matrix() -> None:

    with pytest.raises(DegenerateCurvature):
        floor_eigenvalues(np.zeros((3, 3)), 1e-4)


@pytest.mark.parametrize("epsilon", [0.0, 1.0, -1e-3])
def test_floor_eigenvalues_bad_epsilon(epsilon) -> None:

    with pytest.raises(InvalidInput):
        floor_eigenvalues(np.eye(2), epsilon)


def test_floored_random_matrices_factor(rng) -> None:

    for _ in range(100):
        m = rng.standard_normal((6, 6))
        cholesky(floor_eigenvalues(m + m.T, 1e-4))


def test_rotate_basis_examples(rng) -> None:

    V = np.linalg.qr(rng.standard_normal((7, 3)))[0]

    C, V_bar = rotate_basis(V, np.eye(3))
    assert np.allclose(V_bar, V)

    C, V_bar = rotate_basis(V[:, :1], np.array([[4.0]]))
    assert np.allclose(C, [[2.0]])
    assert np.allclose(V_bar, V[:, :1] / 2)


def test_whitening(rng) -> None:

    M = rng.standard_normal((12, 12))
    B = M @ M.T + np.eye(12)

    g, d_prev = rng.standard_normal((2, 12))

    basis = build_basis(explicit(B), g, Preconditioner.identity(12), 4, d_prev)
    basis.whiten(1e-4)

    assert np.allclose(basis.V_bar.T @ B @ basis.V_bar, np.eye(basis.dim), atol=1e-6)
    assert np.allclose(basis.V_bar @ basis.C.T, basis.V, atol=1e-10)

"""
"""

import numpy as np
import pytest

from ksd.exceptions import InvalidInput, InvalidStart
from ksd.optimizers import bfgs_minimize, preconditioned_cg
from ksd.subspace import Preconditioner


def shifted_quadratic(b: np.ndarray):
    def f_and_grad(a):
        return 0.5 * a @ a - b @ a, a - b

    return f_and_grad


def rosenbrock(a):
    x, y = a
    value = (1 - x) ** 2 + 100 * (y - x * x) ** 2
    grad = np.array([-2 * (1 - x) - 400 * x * (y - x * x), 200 * (y - x * x)])
    return value, grad


def test_bfgs_quadratic() -> None:

    b = np.array([1.0, -2.0, 0.5])

    result = bfgs_minimize(shifted_quadratic(b), np.zeros(3))

    assert np.allclose(result.a, b, atol=1e-8)
    assert result.iterations <= 4
    assert result.converged


def test_bfgs_constant_function() -> None:

    start = np.array([0.3, -0.7])

    result = bfgs_minimize(lambda a: (4.0, np.zeros_like(a)), start)

    assert np.array_equal(result.a, start)
    assert result.value == 4.0
    assert result.iterations == 0


def test_bfgs_values_never_increase() -> None:

    result = bfgs_minimize(rosenbrock, np.array([-1.2, 1.0]), max_iters=60)

    assert np.all(np.diff(result.values) <= 0)
    assert result.value == min(result.values)
    assert result.value < rosenbrock(np.array([-1.2, 1.0]))[0]


def test_bfgs_rosenbrock_converges() -> None:

    result = bfgs_minimize(rosenbrock, np.array([-1.2, 1.0]), max_iters=200)

    assert np.allclose(result.a, [1.0, 1.0], atol=1e-4)


def test_bfgs_callback_sees_accepted_points() -> None:

    seen = []

    result = bfgs_minimize(
        shifted_quadratic(np.ones(4)),
        np.zeros(4),
        callback=lambda a, f: seen.append(f),
    )

    assert seen == result.values[1:]


def test_bfgs_one_evaluation_per_point() -> None:

    calls = []

    def counted(a):
        calls.append(a.copy())
        return shifted_quadratic(np.ones(2))(a)

    result = bfgs_minimize(counted, np.zeros(2))

    assert result.evaluations == len(calls)


def test_bfgs_invalid_start() -> None:

    with pytest.raises(InvalidStart):
        bfgs_minimize(lambda a: (float("nan"), np.zeros_like(a)), np.zeros(2))


def test_cg_solves_spd_system(rng) -> None:

    M = rng.standard_normal((10, 10))
    A = M @ M.T + np.eye(10)
    b = rng.standard_normal(10)

    result = preconditioned_cg(lambda v: A @ v, b, tolerance=1e-12, max_iters=100)

    assert not result.truncated
    assert np.allclose(A @ result.solution, b, atol=1e-9)


def test_cg_diagonal_preconditioner_is_exact() -> None:

    d = np.array([1.0, 10.0, 100.0])

    result = preconditioned_cg(
        lambda v: d * v, np.ones(3), precond=Preconditioner(d), tolerance=1e-14
    )

    assert result.iterations == 1
    assert np.allclose(result.solution, 1 / d)


def test_cg_warm_start_at_solution() -> None:

    A = np.diag([2.0, 3.0])
    b = np.array([2.0, 3.0])

    result = preconditioned_cg(lambda v: A @ v, b, x0=np.ones(2))

    assert result.iterations == 0
    assert np.array_equal(result.solution, np.ones(2))


def test_cg_truncates_on_negative_curvature() -> None:

    A = np.diag([-1.0, 2.0])

    result = preconditioned_cg(lambda v: A @ v, np.array([1.0, 0.0]))

    assert result.truncated
    assert np.array_equal(result.solution, np.zeros(2))


def test_cg_shape_mismatch() -> None:

    with pytest.raises(InvalidInput):
        preconditioned_cg(lambda v: v, np.ones(3), x0=np.zeros(2))

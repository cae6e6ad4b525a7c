"""
"""

from collections import deque

import numpy as np
import pytest

from ksd.curvature import CurvatureKind, CurvatureOperator
from ksd.data import SubsetPlan
from ksd.exceptions import InvalidInput
from ksd.network import Batch, LossKind, NetworkSpec, Nonlinearity, gradient, objective
from ksd.subspace import Preconditioner
from ksd.optimizers import (
    HfConfig,
    HfOptimizer,
    KrylovSubspaceDescent,
    KsdConfig,
    LbfgsConfig,
    LbfgsOptimizer,
    Optimizers,
    SgdConfig,
    SgdOptimizer,
    hf_run,
    ksd_run,
    lbfgs_run,
    reduction_ratio,
    sgd_run,
    subspace_objective,
    two_loop,
    update_damping,
)

from .. import central_difference, quadratic_minimum


@pytest.mark.parametrize(
    "name,optimizer",
    [
        ("ksd", KrylovSubspaceDescent),
        ("HF", HfOptimizer),
        ("sgd", SgdOptimizer),
        ("lbfgs", LbfgsOptimizer),
    ],
)
def test_optimizer_for_name(name, optimizer) -> None:

    assert Optimizers.for_name(name) is optimizer


def test_optimizer_for_name_unknown() -> None:

    with pytest.raises(InvalidInput):
        Optimizers.for_name("adam")


def test_optimizer_subclasses_are_concrete() -> None:

    names = {subclass.name for subclass in Optimizers.subclasses()}

    assert names == {"ksd", "hf", "sgd", "lbfgs"}


def test_subspace_objective_at_zero(autoencoder_problem, rng) -> None:

    spec, theta, batch = autoencoder_problem
    V_bar = rng.standard_normal((spec.num_params, 3))

    value, _ = subspace_objective(spec, theta, V_bar, np.zeros(3), batch, 1e-3)

    assert value == objective(spec, theta, batch, 1e-3)


def test_subspace_objective_gradient(autoencoder_problem, rng) -> None:

    spec, theta, batch = autoencoder_problem
    V_bar = 0.1 * rng.standard_normal((spec.num_params, 3))
    a = rng.standard_normal(3)

    _, grad = subspace_objective(spec, theta, V_bar, a, batch)
    fd = central_difference(lambda x: subspace_objective(spec, theta, V_bar, x, batch)[0], a)

    assert np.allclose(grad, fd, rtol=1e-5, atol=1e-8)


def test_subspace_objective_zero_column(autoencoder_problem, rng) -> None:

    spec, theta, batch = autoencoder_problem
    V_bar = rng.standard_normal((spec.num_params, 3))
    V_bar[:, 1] = 0.0

    _, grad = subspace_objective(spec, theta, V_bar, np.ones(3), batch)

    assert grad[1] == 0.0


def test_ksd_exact_on_quadratic(quadratic5) -> None:

    spec, batch = quadratic5
    config = KsdConfig(krylov_dim=5, l2_coeff=0.0)

    theta, records = ksd_run(
        spec, batch, np.zeros(spec.num_params), config, SubsetPlan.full_batch(), 1
    )

    assert len(records) == 1
    assert np.allclose(theta, quadratic_minimum(spec, batch), atol=1e-6)


def test_ksd_full_batch_is_monotone(autoencoder_problem) -> None:

    spec, theta, batch = autoencoder_problem
    config = KsdConfig(krylov_dim=5, bfgs_iterations=10)
    start = objective(spec, theta, batch, config.l2_coeff)

    _, records = ksd_run(spec, batch, theta, config, SubsetPlan.full_batch(), 50)

    values = [start] + [record.train_obj for record in records]
    assert len(records) == 50
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] < start


def test_ksd_deterministic(autoencoder_problem) -> None:

    spec, theta, batch = autoencoder_problem
    config = KsdConfig(krylov_dim=4, bfgs_iterations=5, seed=3)
    plan = SubsetPlan.for_krylov_dim(4, seed=3)

    first, _ = ksd_run(spec, batch, theta, config, plan, 3)
    second, _ = ksd_run(spec, batch, theta, config, plan, 3)

    assert np.array_equal(first, second)


def test_ksd_step_lies_in_basis(autoencoder_problem) -> None:

    spec, theta, batch = autoencoder_problem
    optimizer = KrylovSubspaceDescent(
        spec, batch, KsdConfig(krylov_dim=4), SubsetPlan.for_krylov_dim(4)
    )

    theta_new = next(optimizer.iterate(theta))
    step = theta_new - theta
    V = optimizer.last_basis.V

    assert optimizer.last_basis.dim == 5
    assert np.linalg.norm(step - V @ (V.T @ step)) < 1e-8 * max(np.linalg.norm(step), 1e-300)
    assert optimizer.last_bfgs.value <= optimizer.last_bfgs.values[0]


def test_ksd_hessian_curvature_runs(tiny_problem) -> None:

    spec, theta, batch = tiny_problem
    config = KsdConfig(krylov_dim=3, bfgs_iterations=5, curvature=CurvatureKind.hessian)

    final, records = ksd_run(spec, batch, theta, config, SubsetPlan.full_batch(), 2)

    assert np.all(np.isfinite(final))
    assert records[-1].train_obj <= objective(spec, theta, batch, config.l2_coeff)


@pytest.mark.parametrize(
    "actual,predicted,expected",
    [(-1.0, -1.0, 1.0), (-0.5, -2.0, 0.25), (1.0, -1.0, -1.0), (-1.0, 0.0, 0.0), (-1.0, 0.5, 0.0)],
)
def test_reduction_ratio(actual, predicted, expected) -> None:

    assert reduction_ratio(actual, predicted) == expected


@pytest.mark.parametrize("rho,factor", [(1.0, 1 / 1.5), (0.5, 1.0), (0.1, 1.5), (-2.0, 1.5)])
def test_update_damping(rho, factor) -> None:

    assert update_damping(2.0, rho, HfConfig()) == pytest.approx(2.0 * factor)


def test_hf_newton_step_on_quadratic(quadratic5) -> None:

    spec, batch = quadratic5
    config = HfConfig(initial_lambda=1e-10, cg_tolerance=1e-12, max_cg=50, l2_coeff=0.0)
    optimizer = HfOptimizer(spec, batch, config, SubsetPlan.full_batch())
    theta0 = np.zeros(spec.num_params)

    theta1 = next(optimizer.iterate(theta0))

    assert np.allclose(theta1, quadratic_minimum(spec, batch), atol=1e-6)
    assert optimizer.lam < config.initial_lambda
    assert np.allclose(optimizer.warm, theta1 - theta0)
    assert not optimizer.last_cg.truncated


def test_hf_decreases_objective(autoencoder_problem) -> None:

    spec, theta, batch = autoencoder_problem
    config = HfConfig(max_cg=20)

    final, records = hf_run(spec, batch, theta, config, SubsetPlan.full_batch(), 5)

    assert len(records) == 5
    assert records[-1].train_obj < objective(spec, theta, batch, config.l2_coeff)
    values = [record.train_obj for record in records]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_hf_counts_truncations(autoencoder_problem, rng) -> None:

    spec, theta, batch = autoencoder_problem
    optimizer = HfOptimizer(spec, batch, HfConfig(initial_lambda=1e-8))
    g = rng.standard_normal(spec.num_params)

    # negative definite curvature stops CG immediately
    result = optimizer._solve(
        lambda v: -v, g, Preconditioner.identity(spec.num_params), np.zeros(spec.num_params)
    )

    assert result.truncated
    assert optimizer.truncations == 1


def test_hf_warm_start_accumulates(quadratic5) -> None:

    spec, batch = quadratic5
    config = HfConfig(max_cg=1, cg_tolerance=1e-14, l2_coeff=0.0)
    optimizer = HfOptimizer(spec, batch, config, SubsetPlan.full_batch())
    theta = np.zeros(spec.num_params)
    g = gradient(spec, theta, batch)
    curvature = CurvatureOperator(spec, theta, batch)
    precond = Preconditioner.identity(spec.num_params)

    A = curvature.explicit() + optimizer.lam * np.eye(spec.num_params)
    exact = np.linalg.solve(A, -g)

    def energy(d: np.ndarray) -> float:
        return float((d - exact) @ A @ (d - exact))

    d = np.zeros(spec.num_params)
    errors = [energy(d)]
    for _ in range(4):
        d_next = optimizer._solve(curvature, g, precond, d).solution
        assert not np.array_equal(d_next, d)
        d = d_next
        errors.append(energy(d))

    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_hf_keeps_previous_direction(autoencoder_problem) -> None:

    spec, theta, batch = autoencoder_problem
    optimizer = HfOptimizer(spec, batch, HfConfig(max_cg=1), SubsetPlan.full_batch())

    directions = []
    for _ in zip(range(3), optimizer.iterate(theta)):
        directions.append(optimizer.warm.copy())

    assert not np.array_equal(directions[0], directions[1])
    assert not np.array_equal(directions[1], directions[2])


@pytest.mark.parametrize("run", [ksd_run, hf_run])
def test_stationary_start_stops_cleanly(run) -> None:

    spec = NetworkSpec((3, 2), (Nonlinearity.linear,), LossKind.squared_error)
    batch = Batch(np.zeros((6, 3)), np.zeros((6, 2)))
    theta = np.zeros(spec.num_params)
    config = KsdConfig(l2_coeff=0.0) if run is ksd_run else HfConfig(l2_coeff=0.0)

    final, records = run(spec, batch, theta, config, SubsetPlan.full_batch(), 3)

    assert records == []
    assert np.array_equal(final, theta)


def test_sgd_zero_learning_rate(classifier_problem) -> None:

    spec, theta, batch = classifier_problem

    final, records = sgd_run(spec, batch, theta, SgdConfig(learning_rate=0.0), 2)

    assert np.array_equal(final, theta)
    assert len(records) == 2


def test_sgd_epoch_by_hand(classifier_problem) -> None:

    spec, theta, batch = classifier_problem
    batch = batch.take(range(4))
    config = SgdConfig(learning_rate=0.3, decay=0.5, minibatch=2, seed=8)

    final, _ = sgd_run(spec, batch, theta, config, 1)

    order = np.random.default_rng(8).permutation(4)
    expected = theta.copy()
    for t, rows in enumerate([order[:2], order[2:]]):
        eta = 0.3 / (1 + 0.5 * t)
        expected -= eta * gradient(spec, expected, batch.take(rows), config.l2_coeff)

    assert np.array_equal(final, expected)


def test_sgd_learning_rate_schedule(quadratic5) -> None:

    spec, batch = quadratic5
    optimizer = SgdOptimizer(spec, batch, SgdConfig(learning_rate=0.2, decay=0.1))

    assert optimizer.learning_rate(0) == 0.2
    assert optimizer.learning_rate(10) == pytest.approx(0.1)


def test_sgd_converges_on_quadratic(quadratic5) -> None:

    spec, batch = quadratic5
    config = SgdConfig(learning_rate=0.05, decay=0.01, minibatch=10, l2_coeff=0.0)

    final, _ = sgd_run(spec, batch, np.zeros(spec.num_params), config, 200)

    best = objective(spec, quadratic_minimum(spec, batch), batch)
    assert objective(spec, final, batch) - best < 1e-2


def test_two_loop_empty_memory(rng) -> None:

    g = rng.standard_normal(5)

    assert np.array_equal(two_loop(g, deque()), -g)


def test_two_loop_single_pair_satisfies_secant(rng) -> None:

    s = rng.standard_normal(4)
    y = s + 0.1 * rng.standard_normal(4)
    memory = deque([(s, y, 1.0 / (s @ y))])

    # the implied inverse Hessian maps y to s
    assert np.allclose(-two_loop(y, memory), s)


def test_lbfgs_first_step_is_steepest_descent(quadratic5) -> None:

    spec, batch = quadratic5
    optimizer = LbfgsOptimizer(spec, batch, LbfgsConfig(l2_coeff=0.0))
    theta0 = np.zeros(spec.num_params)
    g = gradient(spec, theta0, batch)

    theta1 = next(optimizer.iterate(theta0))
    step = theta1 - theta0

    cosine = -(step @ g) / (np.linalg.norm(step) * np.linalg.norm(g))
    assert cosine == pytest.approx(1.0)


def test_lbfgs_is_monotone(autoencoder_problem) -> None:

    spec, theta, batch = autoencoder_problem
    config = LbfgsConfig(window=5)
    start = objective(spec, theta, batch, config.l2_coeff)

    _, records = lbfgs_run(spec, batch, theta, config, 10)

    values = [start] + [record.train_obj for record in records]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_lbfgs_converges_on_quadratic(quadratic5) -> None:

    spec, batch = quadratic5

    # the quadratic fits inside the memory window
    budget = spec.num_params + 2
    theta0 = np.zeros(spec.num_params)

    final, records = lbfgs_run(spec, batch, theta0, LbfgsConfig(l2_coeff=0.0), budget)

    assert np.linalg.norm(final - quadratic_minimum(spec, batch)) < 1e-8
    assert len(records) <= budget

"""Self-Test Oracles

Independent numerical checks of the gradient, curvature products,
Krylov basis and eigenvalue flooring against finite differences and
explicitly assembled matrices. Each check returns an OracleResult
rather than raising, so the CLI can report all of them.
"""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from loguru import logger

from ..curvature import CurvatureKind, CurvatureOperator, multiply_G, multiply_H
from ..exceptions import KsdError
from ..linalg import cholesky
from ..network import (
    Batch,
    LossKind,
    NetworkSpec,
    Nonlinearity,
    Sample,
    forward,
    gradient,
    init_params,
    objective,
)
from ..optimizers.cg import preconditioned_cg
from ..subspace import Preconditioner, build_basis, floor_eigenvalues


@dataclass
class OracleResult:
    name: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-300)
    return float(np.linalg.norm(a - b)) / scale


def small_net(loss_kind: LossKind, dims=(4, 3, 2)) -> NetworkSpec:
    """Logistic hidden layers, output suited to `loss_kind`."""
    output = Nonlinearity.linear if loss_kind.is_classification else Nonlinearity.logistic
    hidden = (Nonlinearity.logistic,) * (len(dims) - 2)
    return NetworkSpec(tuple(dims), hidden + (output,), loss_kind)


def random_batch(spec: NetworkSpec, rng: np.random.Generator, n: int = 5) -> Batch:
    inputs = rng.standard_normal((n, spec.input_dim))
    if spec.loss_kind.is_classification:
        targets = rng.integers(0, spec.output_dim, size=n)
    else:
        targets = rng.uniform(0.0, 1.0, size=(n, spec.output_dim))
    return Batch(inputs, targets)


def _params(spec: NetworkSpec, rng: np.random.Generator) -> np.ndarray:
    return init_params(spec, int(rng.integers(2 ** 31)), scale=2.0) + 0.1 * rng.standard_normal(
        spec.num_params
    )


def check_gradient(seed: int = 0, step: float = 1e-5, tolerance: float = 1e-6) -> OracleResult:
    """Backprop gradient against central differences, both losses."""
    rng = np.random.default_rng(seed)
    worst = 0.0

    for loss_kind in LossKind:
        spec = small_net(loss_kind)
        batch = random_batch(spec, rng)
        theta = _params(spec, rng)
        g = gradient(spec, theta, batch, 1e-3)

        fd = np.empty_like(theta)
        for i in range(theta.size):
            e = np.zeros_like(theta)
            e[i] = step
            fd[i] = (
                objective(spec, theta + e, batch, 1e-3) - objective(spec, theta - e, batch, 1e-3)
            ) / (2 * step)

        worst = max(worst, _relative(g, fd))

    return OracleResult("gradient", worst < tolerance, f"max relative error {worst:.2e}")


def _jacobian(spec: NetworkSpec, theta: np.ndarray, x: np.ndarray, step: float) -> np.ndarray:
    columns = []
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = step
        plus = forward(spec, theta + e, x).output
        minus = forward(spec, theta - e, x).output
        columns.append((plus - minus) / (2 * step))
    return np.column_stack(columns)


def check_gauss_newton(
    seed: int = 1, trials: int = 20, step: float = 1e-6, tolerance: float = 1e-5
) -> OracleResult:
    """multiply_G against Jᵀ H_E J with a finite-difference Jacobian."""
    rng = np.random.default_rng(seed)
    worst = 0.0

    for trial in range(trials):
        loss_kind = list(LossKind)[trial % 2]
        spec = small_net(loss_kind)
        theta = _params(spec, rng)
        sample = next(iter(random_batch(spec, rng, 1)))
        v = rng.standard_normal(spec.num_params)

        J = _jacobian(spec, theta, sample.x, step)
        output = forward(spec, theta, sample.x).output
        if loss_kind.is_classification:
            p = np.exp(output - output.max())
            p /= p.sum()
            H_E = np.diag(p) - np.outer(p, p)
        else:
            H_E = 2.0 * np.eye(spec.output_dim)

        explicit = J.T @ H_E @ J @ v
        worst = max(worst, _relative(multiply_G(spec, theta, v, sample), explicit))

    return OracleResult("gauss-newton", worst < tolerance, f"max relative error {worst:.2e}")


def check_hessian(
    seed: int = 2, trials: int = 20, step: float = 1e-5, tolerance: float = 1e-4
) -> OracleResult:
    """multiply_H against differences of gradients, plus symmetry."""
    rng = np.random.default_rng(seed)
    worst = asymmetry = 0.0

    for trial in range(trials):
        loss_kind = list(LossKind)[trial % 2]
        spec = small_net(loss_kind)
        theta = _params(spec, rng)
        sample = next(iter(random_batch(spec, rng, 1)))
        batch = Batch.from_samples([sample])
        u, v = rng.standard_normal((2, spec.num_params))

        Hv = multiply_H(spec, theta, v, sample)
        fd = (gradient(spec, theta + step * v, batch) - gradient(spec, theta - step * v, batch)) / (
            2 * step
        )
        worst = max(worst, _relative(Hv, fd))

        uHv, vHu = u @ Hv, v @ multiply_H(spec, theta, u, sample)
        asymmetry = max(asymmetry, abs(uHv - vHu) / max(1.0, abs(uHv)))

    passed = worst < tolerance and asymmetry < 1e-10
    return OracleResult(
        "hessian", passed, f"max relative error {worst:.2e}, asymmetry {asymmetry:.2e}"
    )


def check_psd(seed: int = 3, trials: int = 100) -> OracleResult:
    """vᵀGv >= -1e-12‖v‖² for random v."""
    rng = np.random.default_rng(seed)
    spec = small_net(LossKind.softmax_cross_entropy, (5, 4, 3))
    operator = CurvatureOperator(spec, _params(spec, rng), random_batch(spec, rng, 8))

    worst = np.inf
    for _ in range(trials):
        v = rng.standard_normal(spec.num_params)
        worst = min(worst, operator.quadratic_form(v) / float(v @ v))

    return OracleResult("gauss-newton psd", worst >= -1e-12, f"min vᵀGv/‖v‖² {worst:.2e}")


def check_basis(seed: int = 4, K: int = 5, tolerance: float = 1e-8) -> OracleResult:
    """H̄ == VᵀBV by explicit assembly, and VᵀV == I."""
    rng = np.random.default_rng(seed)
    worst_h = worst_v = 0.0

    for kind in CurvatureKind:
        spec = small_net(LossKind.squared_error)
        theta = _params(spec, rng)
        batch = random_batch(spec, rng, 6)
        operator = CurvatureOperator(spec, theta, batch, kind, 1e-3)
        g = gradient(spec, theta, batch, 1e-3)
        precond = Preconditioner(rng.uniform(0.5, 2.0, spec.num_params))

        basis = build_basis(operator, g, precond, K, rng.standard_normal(spec.num_params))
        B = operator.explicit()
        worst_h = max(worst_h, _relative(basis.H_bar, basis.V.T @ B @ basis.V))
        worst_v = max(worst_v, float(np.max(np.abs(basis.V.T @ basis.V - np.eye(basis.dim)))))

    passed = worst_h < tolerance and worst_v < tolerance
    return OracleResult(
        "reduced curvature", passed, f"H̄ error {worst_h:.2e}, orthonormality {worst_v:.2e}"
    )


def check_containment(
    seed: int = 5, dim: int = 30, K: int = 5, tolerance: float = 1e-8
) -> OracleResult:
    """K-step preconditioned CG on (B + λD)x = -g stays in span(V)."""
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((dim, dim))
    B = M @ M.T / dim + 0.1 * np.eye(dim)
    g = rng.standard_normal(dim)
    precond = Preconditioner(rng.uniform(0.5, 2.0, dim))

    basis = build_basis(lambda v: B @ v, g, precond, K, rng.standard_normal(dim))
    V = basis.V

    worst = 0.0
    for lam in (0.0, 0.01, 0.1, 1.0, 10.0):
        damped = B + lam * np.diag(precond.d)
        x = preconditioned_cg(lambda v: damped @ v, -g, None, precond, K, 0.0).solution
        worst = max(worst, float(np.linalg.norm(x - V @ (V.T @ x)) / np.linalg.norm(x)))

    return OracleResult("cg containment", worst < tolerance, f"max projection residual {worst:.2e}")


def check_flooring(seed: int = 6, trials: int = 100, dim: int = 6) -> OracleResult:
    """Floored random symmetric matrices always factor."""
    rng = np.random.default_rng(seed)
    failures = 0

    for _ in range(trials):
        m = rng.standard_normal((dim, dim))
        try:
            cholesky(floor_eigenvalues(m + m.T, 1e-4))
        except KsdError as error:
            logger.debug(f"flooring failure: {error}")
            failures += 1

    return OracleResult("eigenvalue flooring", failures == 0, f"{failures}/{trials} failed")


ORACLES: List[Callable[[], OracleResult]] = [
    check_gradient,
    check_gauss_newton,
    check_hessian,
    check_psd,
    check_basis,
    check_containment,
    check_flooring,
]


def run_oracles() -> List[OracleResult]:
    results = []
    for oracle in ORACLES:
        try:
            result = oracle()
        except KsdError as error:
            result = OracleResult(oracle.__name__, False, str(error))
        logger.debug(str(result))
        results.append(result)
    return results

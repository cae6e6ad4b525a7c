"""Krylov Subspace Descent

Each outer iteration:

1. draws the A, B and C subsets,
2. takes the gradient and the floored Fisher diagonal on A,
3. builds the preconditioned Krylov basis (plus the previous step)
   with curvature products on B, floors and whitens it,
4. runs BFGS over the subspace coefficients on C, starting at zero,
5. moves θ by V̄a*.
"""

from typing import Optional, Tuple

import numpy as np

from loguru import logger

from ..curvature import CurvatureOperator
from ..data.subsets import SubsetPlan, draw_subsets
from ..exceptions import NumericalOverflow, ZeroGradient
from ..network import (
    Batch,
    NetworkSpec,
    ParameterVector,
    fisher_diagonal,
    objective_and_gradient,
)
from ..subspace import KrylovBasis, Preconditioner, build_basis
from .bfgs import BfgsResult, bfgs_minimize
from .models import KsdConfig
from .optimizer import BaseOptimizer, OptimizerState


def subspace_objective(
    spec: NetworkSpec,
    theta: ParameterVector,
    V_bar: np.ndarray,
    a: np.ndarray,
    batch: Batch,
    l2_coeff: float = 0.0,
) -> Tuple[float, np.ndarray]:
    """Objective at θ + V̄a on `batch` and its gradient in a, V̄ᵀ∇f.

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    value, grad = objective_and_gradient(spec, theta + V_bar @ a, batch, l2_coeff)
    return value, V_bar.T @ grad


class KrylovSubspaceDescent(BaseOptimizer):
    name = "ksd"

    def __init__(
        self,
        spec: NetworkSpec,
        data: Batch,
        config: Optional[KsdConfig] = None,
        plan: Optional[SubsetPlan] = None,
    ) -> None:
        """
        :spec: NetworkSpec
        :data: Batch of training data
        :config: KsdConfig
        :plan: SubsetPlan, B and C each 1/K of the data by default
        """
        super().__init__(spec, data, config)
        self.plan = plan or SubsetPlan.for_krylov_dim(
            self.config.krylov_dim, seed=self.config.seed
        )
        self.plan.sizes(len(data))
        self.last_basis: Optional[KrylovBasis] = None
        self.last_bfgs: Optional[BfgsResult] = None

    @classmethod
    def default_config(cls) -> KsdConfig:
        return KsdConfig()

    def step(self, state: OptimizerState) -> ParameterVector:
        config = self.config
        theta = state.theta

        A, B, C = draw_subsets(len(self.data), self.plan, state.iteration)
        batch_a, batch_b, batch_c = self.subset(A), self.subset(B), self.subset(C)

        _, g = objective_and_gradient(self.spec, theta, batch_a, config.l2_coeff)
        if not np.any(g):
            raise ZeroGradient("gradient is zero")
        precond = Preconditioner.from_fisher(
            fisher_diagonal(self.spec, theta, batch_a), config.floor_epsilon
        )

        curvature = CurvatureOperator(
            self.spec, theta, batch_b, config.curvature, config.l2_coeff
        )
        basis = build_basis(
            curvature,
            g,
            precond,
            config.krylov_dim,
            state.d_prev,
            seed=config.seed + state.iteration,
        ).whiten(config.floor_epsilon)

        V_bar = basis.V_bar
        points = {"last": theta, "accepted": theta}

        def f_and_grad(a: np.ndarray) -> Tuple[float, np.ndarray]:
            points["last"] = theta + V_bar @ a
            try:
                value, grad = objective_and_gradient(
                    self.spec, points["last"], batch_c, config.l2_coeff
                )
            except NumericalOverflow:
                return np.inf, np.zeros_like(a)
            return value, V_bar.T @ grad

        def accept(a: np.ndarray, value: float) -> None:
            # the evaluation at an accepted point is always the latest one
            points["accepted"] = points["last"]

        result = bfgs_minimize(
            f_and_grad, np.zeros(basis.dim), config.bfgs_iterations, callback=accept
        )
        self.last_basis, self.last_bfgs = basis, result

        theta_new = points["accepted"]
        step = theta_new - theta
        if np.any(step):
            state.d_prev = V_bar @ result.a

        logger.debug(
            f"ksd {state.iteration}: dim {basis.dim}, {curvature.calls} products, "
            f"subspace f {result.values[0]:.6g} -> {result.value:.6g}, "
            f"|step| {np.linalg.norm(step):.3g}"
        )
        return theta_new


def ksd_run(
    spec: NetworkSpec,
    data: Batch,
    theta: ParameterVector,
    config: Optional[KsdConfig] = None,
    plan: Optional[SubsetPlan] = None,
    max_iterations: int = 100,
    validation: Optional[Batch] = None,
):
    """Runs KSD from `theta`; returns (θ_final, records)."""
    optimizer = KrylovSubspaceDescent(spec, data, config, plan)
    return optimizer.run(theta, max_iterations, validation)

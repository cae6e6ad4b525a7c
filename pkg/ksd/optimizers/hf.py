"""Truncated-CG Newton (Hessian-free style)

Each outer iteration approximately solves (B + λI)d = -g with
preconditioned CG on the B subset, warm-started from the previous
solution, backtracks along d on the C subset and adjusts λ with a
Levenberg-Marquardt rule.
"""

from typing import Optional

import numpy as np

from loguru import logger

from ..curvature import CurvatureOperator
from ..data.subsets import SubsetPlan, draw_subsets
from ..exceptions import ZeroGradient
from ..network import (
    Batch,
    NetworkSpec,
    ParameterVector,
    fisher_diagonal,
    objective,
    objective_and_gradient,
)
from ..subspace import Preconditioner
from .cg import CgResult, preconditioned_cg
from .models import HfConfig
from .optimizer import BaseOptimizer, OptimizerState

MAX_HALVINGS = 30
GOOD_RATIO = 0.75
POOR_RATIO = 0.25


def reduction_ratio(actual: float, predicted: float) -> float:
    """Actual over predicted change of the objective.

    A model that predicts no decrease scores 0.
    """
    if not predicted < 0:
        return 0.0
    return actual / predicted


def update_damping(lam: float, rho: float, config: HfConfig) -> float:
    """λ shrinks when the model was good, grows when it was poor."""
    if rho > GOOD_RATIO:
        return lam / config.decrease
    if rho < POOR_RATIO:
        return lam * config.increase
    return lam


class HfOptimizer(BaseOptimizer):
    name = "hf"

    def __init__(
        self,
        spec: NetworkSpec,
        data: Batch,
        config: Optional[HfConfig] = None,
        plan: Optional[SubsetPlan] = None,
    ) -> None:
        super().__init__(spec, data, config)
        self.plan = plan or SubsetPlan.for_krylov_dim(20, seed=self.config.seed)
        self.plan.sizes(len(data))
        self.lam = self.config.initial_lambda
        self.truncations = 0
        self.warm = np.zeros(spec.num_params)
        self.last_cg: Optional[CgResult] = None

    @classmethod
    def default_config(cls) -> HfConfig:
        return HfConfig()

    def iterate(self, theta: ParameterVector):
        self.lam = self.config.initial_lambda
        self.warm = np.zeros(self.spec.num_params)
        return super().iterate(theta)

    def _solve(
        self,
        curvature: CurvatureOperator,
        g: np.ndarray,
        precond: Preconditioner,
        x0: np.ndarray,
    ) -> CgResult:
        lam = self.lam
        result = preconditioned_cg(
            lambda v: curvature(v) + lam * v,
            -g,
            x0,
            precond,
            self.config.max_cg,
            self.config.cg_tolerance,
        )
        if result.truncated:
            self.truncations += 1
            logger.warning(
                f"hf: non-positive curvature, CG truncated after {result.iterations} "
                f"iterations ({self.truncations} so far)"
            )
        return result

    def step(self, state: OptimizerState) -> ParameterVector:
        config = self.config
        theta = state.theta

        A, B, C = draw_subsets(len(self.data), self.plan, state.iteration)
        batch_a, batch_c = self.subset(A), self.subset(C)

        _, g = objective_and_gradient(self.spec, theta, batch_a, config.l2_coeff)
        if not np.any(g):
            raise ZeroGradient("gradient is zero")
        precond = Preconditioner.from_fisher(
            fisher_diagonal(self.spec, theta, batch_a), config.floor_epsilon
        )
        curvature = CurvatureOperator(
            self.spec, theta, self.subset(B), config.curvature, config.l2_coeff
        )

        cg = self._solve(curvature, g, precond, self.warm)
        d = cg.solution

        if not g @ d < 0 and np.any(self.warm):
            logger.debug("hf: warm start gave no descent direction, restarting CG")
            cg = self._solve(curvature, g, precond, np.zeros_like(g))
            d = cg.solution

        self.last_cg = cg
        self.warm = d

        f0 = objective(self.spec, theta, batch_c, config.l2_coeff)
        predicted = float(g @ d + 0.5 * curvature.quadratic_form(d)) if np.any(d) else 0.0

        alpha, f_full, f_alpha = 1.0, f0, np.inf
        for halving in range(MAX_HALVINGS if np.any(d) else 0):
            f_alpha = objective(self.spec, theta + alpha * d, batch_c, config.l2_coeff)
            if halving == 0:
                f_full = f_alpha
            if f_alpha < f0:
                break
            alpha *= 0.5
        else:
            alpha = 0.0

        rho = reduction_ratio(f_full - f0, predicted)
        lam = self.lam
        self.lam = update_damping(lam, rho, config)

        logger.debug(
            f"hf {state.iteration}: cg {cg.iterations} its, alpha {alpha:g}, "
            f"rho {rho:.3g}, lambda {lam:.3g} -> {self.lam:.3g}"
        )

        if alpha == 0.0:
            return theta

        state.d_prev = alpha * d
        return theta + alpha * d


def hf_run(
    spec: NetworkSpec,
    data: Batch,
    theta: ParameterVector,
    config: Optional[HfConfig] = None,
    plan: Optional[SubsetPlan] = None,
    max_iterations: int = 100,
    validation: Optional[Batch] = None,
):
    """Runs the truncated-CG Newton baseline; returns (θ_final, records)."""
    optimizer = HfOptimizer(spec, data, config, plan)
    return optimizer.run(theta, max_iterations, validation)

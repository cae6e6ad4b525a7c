"""Limited-Memory BFGS

Full-batch L-BFGS with the two-loop recursion over a moving window of
(s, y) pairs and a strong Wolfe line search. One outer iteration is
one line search. When the line search fails the memory is dropped and
the iteration retries along the steepest descent direction.
"""

import warnings

from collections import deque
from typing import Deque, Optional, Tuple

import numpy as np

from loguru import logger
from scipy.optimize import line_search

from ..exceptions import NumericalOverflow, ZeroGradient
from ..network import Batch, NetworkSpec, ParameterVector, objective_and_gradient
from .bfgs import _Evaluator
from .models import LbfgsConfig
from .optimizer import BaseOptimizer, OptimizerState

Pair = Tuple[np.ndarray, np.ndarray, float]


def two_loop(g: np.ndarray, memory: Deque[Pair]) -> np.ndarray:
    """Search direction -H g for the inverse Hessian implied by `memory`.

    The initial matrix is γI with γ = sᵀy / yᵀy of the newest pair, or
    the identity when the memory is empty.
    """
    q = g.copy()
    alphas = []

    for s, y, rho in reversed(memory):
        alpha = rho * float(s @ q)
        q -= alpha * y
        alphas.append(alpha)

    if memory:
        s, y, _ = memory[-1]
        q *= float(s @ y) / float(y @ y)

    for (s, y, rho), alpha in zip(memory, reversed(alphas)):
        beta = rho * float(y @ q)
        q += (alpha - beta) * s

    return -q


class LbfgsOptimizer(BaseOptimizer):
    name = "lbfgs"

    def __init__(
        self,
        spec: NetworkSpec,
        data: Batch,
        config: Optional[LbfgsConfig] = None,
    ) -> None:
        super().__init__(spec, data, config)
        self.memory: Deque[Pair] = deque(maxlen=self.config.window)
        self.restarts = 0

    @classmethod
    def default_config(cls) -> LbfgsConfig:
        return LbfgsConfig()

    def iterate(self, theta: ParameterVector):
        self.memory.clear()
        self.restarts = 0
        self._old_f: Optional[float] = None
        return super().iterate(theta)

    def _f_and_grad(self, theta: np.ndarray) -> Tuple[float, np.ndarray]:
        try:
            return objective_and_gradient(self.spec, theta, self.data, self.config.l2_coeff)
        except NumericalOverflow:
            return np.inf, np.zeros_like(theta)

    def _search(
        self,
        evaluate: _Evaluator,
        theta: np.ndarray,
        p: np.ndarray,
        f: float,
        g: np.ndarray,
    ) -> Optional[float]:
        old_f = self._old_f
        if old_f is None:
            old_f = f + float(np.linalg.norm(g)) / 2

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            alpha, *_ = line_search(
                evaluate.value, evaluate.grad, theta, p, gfk=g, old_fval=f, old_old_fval=old_f
            )
        return alpha

    def step(self, state: OptimizerState) -> Optional[ParameterVector]:
        evaluate = _Evaluator(self._f_and_grad)
        theta = state.theta
        f, g = evaluate(theta)

        if not np.any(g):
            raise ZeroGradient("gradient is zero")

        p = two_loop(g, self.memory)
        if not p @ g < 0:
            self.memory.clear()
            p = -g

        alpha = self._search(evaluate, theta, p, f, g)

        if alpha is None and self.memory:
            logger.warning(f"lbfgs {state.iteration}: line search failed, restarting")
            self.memory.clear()
            self.restarts += 1
            p = -g
            alpha = self._search(evaluate, theta, p, f, g)

        if alpha is None:
            logger.warning(f"lbfgs {state.iteration}: steepest descent line search failed")
            return None

        theta_new = theta + alpha * p
        f_new, g_new = evaluate(theta_new)

        s, y = theta_new - theta, g_new - g
        sy = float(s @ y)
        if sy > 0:
            self.memory.append((s, y, 1.0 / sy))
        else:
            logger.debug(f"lbfgs {state.iteration}: sᵀy={sy:.3g}, pair dropped")

        logger.debug(
            f"lbfgs {state.iteration}: alpha {alpha:.3g}, f {f:.6g} -> {f_new:.6g}, "
            f"memory {len(self.memory)}"
        )
        self._old_f = f
        state.d_prev = s
        return theta_new


def lbfgs_run(
    spec: NetworkSpec,
    data: Batch,
    theta: ParameterVector,
    config: Optional[LbfgsConfig] = None,
    max_iterations: int = 100,
    validation: Optional[Batch] = None,
):
    """Runs full-batch L-BFGS from `theta`; returns (θ_final, records)."""
    optimizer = LbfgsOptimizer(spec, data, config)
    return optimizer.run(theta, max_iterations, validation)

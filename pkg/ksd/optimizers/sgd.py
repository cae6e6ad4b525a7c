"""Minibatch SGD

One outer iteration is one epoch over a seeded shuffle of the
training data. The learning rate follows η_t = η₀ / (1 + decay·t)
with t counting minibatch updates.
"""

from typing import Optional

import numpy as np

from loguru import logger

from ..network import Batch, NetworkSpec, ParameterVector, gradient
from .models import SgdConfig
from .optimizer import BaseOptimizer, OptimizerState


class SgdOptimizer(BaseOptimizer):
    name = "sgd"

    def __init__(
        self,
        spec: NetworkSpec,
        data: Batch,
        config: Optional[SgdConfig] = None,
    ) -> None:
        super().__init__(spec, data, config)
        self.updates = 0

    @classmethod
    def default_config(cls) -> SgdConfig:
        return SgdConfig()

    def iterate(self, theta: ParameterVector):
        self.updates = 0
        return super().iterate(theta)

    def learning_rate(self, t: int) -> float:
        return self.config.learning_rate / (1.0 + self.config.decay * t)

    def step(self, state: OptimizerState) -> ParameterVector:
        config = self.config
        theta = state.theta.copy()
        order = state.rng.permutation(len(self.data))

        for start in range(0, len(order), config.minibatch):
            batch = self.data.take(order[start : start + config.minibatch])
            eta = self.learning_rate(self.updates)
            theta -= eta * gradient(self.spec, theta, batch, config.l2_coeff)
            self.updates += 1

        logger.debug(f"sgd epoch {state.iteration}: {self.updates} updates, eta {eta:.3g}")
        state.d_prev = theta - state.theta
        return theta


def sgd_run(
    spec: NetworkSpec,
    data: Batch,
    theta: ParameterVector,
    config: Optional[SgdConfig] = None,
    max_epochs: int = 100,
    validation: Optional[Batch] = None,
):
    """Runs minibatch SGD from `theta`; returns (θ_final, records)."""
    optimizer = SgdOptimizer(spec, data, config)
    return optimizer.run(theta, max_epochs, validation)

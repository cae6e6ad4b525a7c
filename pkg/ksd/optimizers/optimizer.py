"""Optimizer Base Class
"""

import abc
import time

from dataclasses import dataclass, field
from typing import Callable, Generator, List, Optional, Tuple

import numpy as np

from loguru import logger

from ..exceptions import InvalidInput, ZeroGradient
from ..network import Batch, NetworkSpec, ParameterVector, classification_error, objective
from .models import ConvergenceRecord, OptimizerConfig

# Called with each new record and its parameters; True stops the run.
StopRule = Callable[[ConvergenceRecord, ParameterVector], bool]


@dataclass
class OptimizerState:
    """Loop variables carried between outer iterations."""

    theta: ParameterVector
    d_prev: ParameterVector
    iteration: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)

    @classmethod
    def initial(cls, theta: ParameterVector, seed: int = 0) -> "OptimizerState":
        theta = np.array(theta, dtype=np.float64)
        d_prev = np.zeros_like(theta)
        d_prev[0] = 1.0
        return cls(theta, d_prev, 0, np.random.default_rng(seed))


class BaseOptimizer(abc.ABC):
    """An outer loop over parameter vectors.

    Subclasses implement `step`, which advances the state by one outer
    iteration (one epoch for SGD) and returns the new parameters, or
    None when no further progress is possible.
    """

    name: str = "base"

    @classmethod
    def subclasses(cls) -> List[type]:
        """Returns a list of concrete optimizer subclasses."""
        subclasses = []
        for subclass in cls.__subclasses__():
            if not getattr(subclass, "__abstractmethods__", None):
                subclasses.append(subclass)
            subclasses.extend(subclass.subclasses())
        logger.debug(f"{cls.__name__} found {len(subclasses)}")
        return subclasses

    @classmethod
    def for_name(cls, name: str) -> type:
        """Resolves `name` (ksd, hf, sgd, lbfgs) to an optimizer class.

        Raises:
        - InvalidInput
        """
        casefolded_name = name.casefold()
        for subclass in cls.subclasses():
            if subclass.name == casefolded_name:
                return subclass
        raise InvalidInput(f"Unknown optimizer {name}")

    def __init__(
        self,
        spec: NetworkSpec,
        data: Batch,
        config: Optional[OptimizerConfig] = None,
    ) -> None:
        """
        :spec: NetworkSpec
        :data: Batch of training data
        :config: settings model, the subclass default when None
        """
        if len(data) == 0:
            raise InvalidInput("no training data")
        self.spec = spec
        self.data = data
        self.config = config if config is not None else self.default_config()
        self.state: Optional[OptimizerState] = None

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(spec={self.spec!s}, data={len(self.data)})"

    def __str__(self) -> str:
        return f"{self.name} {self.spec!s}"

    @classmethod
    @abc.abstractmethod
    def default_config(cls) -> OptimizerConfig:
        """Settings used when none are given."""

    @abc.abstractmethod
    def step(self, state: OptimizerState) -> Optional[ParameterVector]:
        """One outer iteration starting from state.theta."""

    def subset(self, indices: np.ndarray) -> Batch:
        """Training samples at `indices`; all of the data is returned as is."""
        if len(indices) == len(self.data):
            return self.data
        return self.data.take(indices)

    def train_objective(self, theta: ParameterVector) -> float:
        return objective(self.spec, theta, self.data, self.config.l2_coeff)

    def iterate(self, theta: ParameterVector) -> Generator[ParameterVector, None, None]:
        """Yields the parameters after each outer iteration.

        Ends on its own at a stationary point or when the optimizer
        stalls; otherwise runs for as long as the caller keeps asking.
        """
        self.state = OptimizerState.initial(
            self.spec.layout.check(theta), self.config.seed
        )

        while True:
            self.state.iteration += 1
            try:
                theta = self.step(self.state)
            except ZeroGradient as error:
                logger.info(f"{self.name} stopped at iteration {self.state.iteration}: {error}")
                return

            if theta is None:
                logger.info(f"{self.name} stalled at iteration {self.state.iteration}")
                return

            self.state.theta = theta
            yield theta

    def record(
        self,
        theta: ParameterVector,
        iteration: int,
        seconds: float,
        validation: Optional[Batch] = None,
    ) -> ConvergenceRecord:
        """Measures `theta` for a convergence curve."""
        valid_obj = valid_err = None

        if validation is not None:
            valid_obj = objective(self.spec, theta, validation, self.config.l2_coeff)
            if self.spec.loss_kind.is_classification:
                valid_err = classification_error(self.spec, theta, validation)

        return ConvergenceRecord(
            iteration=iteration,
            seconds=seconds,
            train_obj=self.train_objective(theta),
            valid_obj=valid_obj,
            valid_err_pct=valid_err,
        )

    def run(
        self,
        theta: ParameterVector,
        max_iterations: int,
        validation: Optional[Batch] = None,
        stop: Optional[StopRule] = None,
    ) -> Tuple[ParameterVector, List[ConvergenceRecord]]:
        """Runs up to `max_iterations` outer iterations.

        Time spent measuring records is not counted in `seconds`.

        :theta: starting ParameterVector
        :max_iterations: int
        :validation: optional held-out Batch
        :stop: optional StopRule checked after every record
        :return: (final parameters, records)
        """
        history: List[ConvergenceRecord] = []
        elapsed = 0.0
        theta = self.spec.layout.check(theta)

        if max_iterations < 1:
            return theta, history

        started = time.perf_counter()
        for n, theta in enumerate(self.iterate(theta), start=1):
            elapsed += time.perf_counter() - started

            record = self.record(theta, n, elapsed, validation)
            history.append(record)
            logger.info(
                f"{self.name} {n:4d} {elapsed:8.2f}s train={record.train_obj:.6g} "
                f"valid={record.valid_obj}"
            )

            if n >= max_iterations or (stop is not None and stop(record, theta)):
                break

            started = time.perf_counter()

        return theta, history

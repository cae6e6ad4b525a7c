"""Per-Iteration Subsets

Each outer iteration works on three index sets drawn from the
training data: A for the gradient and preconditioner, B for the
curvature products and C for the subspace minimization. B and C are
drawn afresh every iteration from a stream keyed by (seed, iteration).
"""

from enum import Enum
from typing import Tuple

import numpy as np

from loguru import logger
from pydantic import BaseModel, Field

from ..exceptions import InvalidPlan


class SampleMode(str, Enum):
    full = "full"
    fraction = "fraction"


class SubsetPlan(BaseModel):
    a_mode: SampleMode = SampleMode.full
    a_fraction: float = Field(1.0, gt=0, le=1)
    b_fraction: float = Field(0.05, gt=0, le=1)
    c_fraction: float = Field(0.05, gt=0, le=1)
    disjoint_bc: bool = True
    seed: int = 0

    @classmethod
    def for_krylov_dim(cls, K: int, **kwargs) -> "SubsetPlan":
        """B and C each about 1/K of the data."""
        fraction = 1.0 / max(K, 1)
        kwargs.setdefault("b_fraction", fraction)
        kwargs.setdefault("c_fraction", fraction)
        return cls(**kwargs)

    @classmethod
    def full_batch(cls, seed: int = 0) -> "SubsetPlan":
        """A, B and C are all of the data."""
        return cls(b_fraction=1.0, c_fraction=1.0, disjoint_bc=False, seed=seed)

    def sizes(self, num_samples: int) -> Tuple[int, int, int]:
        """Subset sizes for `num_samples`, floored with a minimum of one.

        Raises:
        - InvalidPlan
        """
        if num_samples < 1:
            raise InvalidPlan("no training samples to draw from")

        def size(fraction: float) -> int:
            return max(1, int(np.floor(fraction * num_samples)))

        a = num_samples if self.a_mode is SampleMode.full else size(self.a_fraction)
        b, c = size(self.b_fraction), size(self.c_fraction)

        if self.disjoint_bc and b + c > num_samples:
            raise InvalidPlan(
                f"disjoint B and C need {b} + {c} samples, only {num_samples} available"
            )

        return a, b, c


def _draw(rng: np.random.Generator, num_samples: int, size: int) -> np.ndarray:
    if size == num_samples:
        return np.arange(num_samples)
    return np.sort(rng.choice(num_samples, size=size, replace=False))


def draw_subsets(
    num_samples: int,
    plan: SubsetPlan,
    iteration: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sorted index arrays (A, B, C) for outer iteration `iteration`.

    A is every index when a_mode is full. B and C are drawn without
    replacement and, with disjoint_bc, share no index. Replaying the
    same (plan, iteration) gives the same draw.

    Raises:
    - InvalidPlan
    """
    a_size, b_size, c_size = plan.sizes(num_samples)
    rng = np.random.default_rng([plan.seed, iteration])

    if plan.a_mode is SampleMode.full:
        A = np.arange(num_samples)
    else:
        A = _draw(rng, num_samples, a_size)

    if plan.disjoint_bc:
        chosen = rng.permutation(num_samples)[: b_size + c_size]
        B, C = np.sort(chosen[:b_size]), np.sort(chosen[b_size:])
    else:
        B = _draw(rng, num_samples, b_size)
        C = _draw(rng, num_samples, c_size)

    logger.debug(f"iteration {iteration}: |A|={len(A)} |B|={len(B)} |C|={len(C)}")
    return A, B, C

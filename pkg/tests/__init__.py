"""
"""

from typing import Callable, Tuple

import numpy as np

from ksd.network import Batch, LossKind, NetworkSpec, Nonlinearity


def linear_regression(dim: int, seed: int = 0, samples: int = 40) -> Tuple[NetworkSpec, Batch]:
    """A single linear layer with squared error and `dim` parameters.

    Its objective is an exact convex quadratic in the parameters, so
    quadratic-model claims can be checked on it exactly.
    """
    rng = np.random.default_rng(seed)
    spec = NetworkSpec((dim - 1, 1), (Nonlinearity.linear,), LossKind.squared_error)
    inputs = rng.standard_normal((samples, dim - 1))
    targets = rng.standard_normal((samples, 1))
    return spec, Batch(inputs, targets)


def quadratic_minimum(spec: NetworkSpec, batch: Batch) -> np.ndarray:
    """Least squares solution for a `linear_regression` problem."""
    design = np.hstack([batch.inputs, np.ones((len(batch), 1))])
    solution, *_ = np.linalg.lstsq(design, batch.targets[:, 0], rcond=None)
    return solution


def central_difference(
    f: Callable[[np.ndarray], float],
    x: np.ndarray,
    step: float = 1e-5,
) -> np.ndarray:
    result = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        result[i] = (f(x + e) - f(x - e)) / (2 * step)
    return result


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-300)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)) / scale)

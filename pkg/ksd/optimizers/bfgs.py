"""Dense BFGS

Full-memory BFGS for the small subspace problems: an inverse Hessian
approximation starting at the identity and a strong Wolfe line search
(scipy.optimize.line_search). It never returns a point worse than the
start.
"""

import warnings

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from loguru import logger
from scipy.optimize import line_search

from ..exceptions import InvalidStart

ValueAndGradient = Callable[[np.ndarray], Tuple[float, np.ndarray]]


@dataclass
class BfgsResult:
    a: np.ndarray
    value: float
    grad: np.ndarray
    iterations: int = 0
    evaluations: int = 0
    converged: bool = False
    values: List[float] = field(default_factory=list)


class _Evaluator:
    """Serves f and ∇f from one call of the combined callback.

    The line search asks for the value and the gradient at the same
    point separately; both come from the last evaluation at that point.
    """

    def __init__(self, f_and_grad: ValueAndGradient) -> None:
        self.f_and_grad = f_and_grad
        self.calls = 0
        self._cache: Dict[bytes, Tuple[float, np.ndarray]] = {}

    def __call__(self, a: np.ndarray) -> Tuple[float, np.ndarray]:
        key = np.asarray(a, dtype=np.float64).tobytes()
        try:
            return self._cache[key]
        except KeyError:
            pass
        self.calls += 1
        value, grad = self.f_and_grad(np.array(a, dtype=np.float64))
        self._cache = {key: (float(value), np.asarray(grad, dtype=np.float64))}
        return self._cache[key]

    def value(self, a: np.ndarray) -> float:
        return self(a)[0]

    def grad(self, a: np.ndarray) -> np.ndarray:
        return self(a)[1]


def _finite(value: float, grad: np.ndarray) -> bool:
    return bool(np.isfinite(value) and np.all(np.isfinite(grad)))


def bfgs_minimize(
    f_and_grad: ValueAndGradient,
    a0: np.ndarray,
    max_iters: int = 30,
    c1: float = 1e-4,
    c2: float = 0.9,
    gtol: float = 1e-10,
    callback: Optional[Callable[[np.ndarray, float], None]] = None,
) -> BfgsResult:
    """Minimizes f starting from a0.

    Stops after `max_iters` iterations, when ‖∇f‖ < gtol·(1 + |f|), or
    when the line search fails; in every case the best point seen is
    returned, so result.value <= f(a0).

    :f_and_grad: callable a ↦ (f(a), ∇f(a))
    :a0: starting vector
    :max_iters: int iteration cap
    :c1: float sufficient decrease constant
    :c2: float curvature constant
    :gtol: float relative gradient tolerance
    :callback: optional, called with (a, f) after each accepted step
    :return: BfgsResult

    Raises:
    - InvalidStart
    """
    evaluate = _Evaluator(f_and_grad)
    a = np.array(a0, dtype=np.float64)
    f, g = evaluate(a)

    if not _finite(f, g):
        raise InvalidStart(f"objective is {f} at the starting point")

    result = BfgsResult(a, f, g, values=[f])
    eye = np.eye(a.size)
    H = eye.copy()
    old_f: Optional[float] = None

    for iteration in range(max_iters):
        if np.linalg.norm(g) < gtol * (1.0 + abs(f)):
            result.converged = True
            break

        p = -H @ g
        if not p @ g < 0:
            logger.debug(f"bfgs iteration {iteration}: not a descent direction, reset")
            H = eye.copy()
            p = -g

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            alpha, *_ = line_search(
                evaluate.value,
                evaluate.grad,
                a,
                p,
                gfk=g,
                old_fval=f,
                old_old_fval=old_f,
                c1=c1,
                c2=c2,
            )

        if alpha is None:
            logger.debug(f"bfgs iteration {iteration}: line search failed")
            break

        a_new = a + alpha * p
        f_new, g_new = evaluate(a_new)

        if not _finite(f_new, g_new) or f_new > f:
            logger.debug(f"bfgs iteration {iteration}: rejected step to f={f_new}")
            break

        s = a_new - a
        y = g_new - g
        sy = float(s @ y)

        if sy > 0:
            rho = 1.0 / sy
            A1 = eye - rho * np.outer(s, y)
            A2 = eye - rho * np.outer(y, s)
            H = A1 @ H @ A2 + rho * np.outer(s, s)
        else:
            logger.debug(f"bfgs iteration {iteration}: sᵀy={sy:.3g}, update skipped")

        old_f, a, f, g = f, a_new, f_new, g_new
        result.values.append(f)
        result.iterations = iteration + 1

        if f <= result.value:
            result.a, result.value, result.grad = a, f, g

        if callback is not None:
            callback(a, f)

    result.evaluations = evaluate.calls
    logger.debug(
        f"bfgs {result.iterations} iterations, {result.evaluations} evaluations, "
        f"f {result.values[0]:.6g} -> {result.value:.6g}"
    )
    return result

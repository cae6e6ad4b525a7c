"""Preconditioned Conjugate Gradient

Solves A x = b for a symmetric operator A given only as a callable,
with a diagonal preconditioner. Meeting a direction of non-positive
curvature stops the solve at the previous iterate.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from loguru import logger

from ..exceptions import InvalidInput, NumericalOverflow
from ..subspace import Preconditioner

Operator = Callable[[np.ndarray], np.ndarray]


@dataclass
class CgResult:
    solution: np.ndarray
    iterations: int
    truncated: bool = False
    residual_norm: float = float("nan")


def preconditioned_cg(
    operator: Operator,
    rhs: np.ndarray,
    x0: Optional[np.ndarray] = None,
    precond: Optional[Preconditioner] = None,
    max_iters: int = 250,
    tolerance: float = 1e-4,
) -> CgResult:
    """Approximately solves operator(x) = rhs starting from x0.

    Stops when ‖r‖ <= tolerance·‖rhs‖, after `max_iters` iterations, or
    when pᵀAp <= 0 (truncated; the previous iterate is returned).

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64)

    if x.shape != rhs.shape:
        raise InvalidInput(f"x0 {x.shape} and rhs {rhs.shape} differ")

    if precond is None:
        precond = Preconditioner.identity(rhs.size)

    r = rhs - operator(x)
    z = precond.solve(r)
    p = z.copy()
    rz = float(r @ z)
    target = tolerance * float(np.linalg.norm(rhs))

    for iteration in range(max_iters):
        residual_norm = float(np.linalg.norm(r))
        if residual_norm <= target:
            return CgResult(x, iteration, False, residual_norm)

        Ap = operator(p)
        curvature = float(p @ Ap)

        if not np.isfinite(curvature):
            raise NumericalOverflow(f"non-finite curvature in CG iteration {iteration}")

        if curvature <= 0:
            logger.warning(f"non-positive curvature {curvature:.3g} at CG iteration {iteration}")
            return CgResult(x, iteration, True, residual_norm)

        alpha = rz / curvature
        x = x + alpha * p
        r = r - alpha * Ap
        z = precond.solve(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    residual_norm = float(np.linalg.norm(r))
    logger.debug(f"CG hit {max_iters} iterations, residual {residual_norm:.3g}")
    return CgResult(x, max_iters, False, residual_norm)

"""Preconditioned Krylov Subspace

Builds an orthonormal basis V for

    span{ (D⁻¹B)ᵏ D⁻¹g : 0 <= k < K } + span{ d_prev }

together with the reduced curvature H̄ = VᵀBV, then floors H̄'s
eigenvalues, factors it and rotates the basis so the reduced curvature
becomes (close to) the identity.

Any callable v ↦ Bv will do as the curvature operator; the optimizers
pass a CurvatureOperator, the oracle checks pass explicit matrices.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from loguru import logger

from .exceptions import (
    DegenerateCurvature,
    InvalidInput,
    NumericalOverflow,
    ZeroGradient,
)
from .linalg import LowerTriangular, SymMatrix, as_symmetric, cholesky, right_solve_transposed, sym_eig

CurvatureFn = Callable[[np.ndarray], np.ndarray]

DEGENERATE_RATIO = 1e-12


@dataclass
class Preconditioner:
    """Positive diagonal D, floored so min(d) >= ε·max(d) > 0."""

    d: np.ndarray

    def __post_init__(self) -> None:
        self.d = np.asarray(self.d, dtype=np.float64)
        if self.d.ndim != 1 or not np.all(np.isfinite(self.d)) or np.any(self.d <= 0):
            raise InvalidInput("preconditioner needs a finite, positive vector")

    @classmethod
    def from_fisher(cls, diagonal: np.ndarray, epsilon: float = 1e-4) -> "Preconditioner":
        """Floors a Fisher diagonal to `epsilon` times its maximum.

        Raises:
        - DegenerateCurvature if the diagonal has no positive entry
        """
        diagonal = np.asarray(diagonal, dtype=np.float64)
        peak = float(np.max(diagonal)) if diagonal.size else 0.0

        if not peak > 0 or not np.isfinite(peak):
            raise DegenerateCurvature(f"Fisher diagonal maximum is {peak}")

        floor = epsilon * peak
        floored = int(np.count_nonzero(diagonal < floor))
        logger.debug(f"fisher floor {floor:.3g}, {floored}/{diagonal.size} floored")
        return cls(np.maximum(diagonal, floor))

    @classmethod
    def identity(cls, dim: int) -> "Preconditioner":
        return cls(np.ones(dim))

    def __len__(self) -> int:
        return len(self.d)

    def solve(self, v: np.ndarray) -> np.ndarray:
        """D⁻¹v."""
        return v / self.d

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Dv."""
        return v * self.d


@dataclass
class KrylovBasis:
    """Columns of V are orthonormal; H̄ == VᵀBV (symmetric).

    After `whiten`, H_floored, C and V_bar are filled in: C Cᵀ ==
    H_floored and V_bar == V C⁻ᵀ spans the same space as V.
    """

    V: np.ndarray
    H_bar: SymMatrix
    H_floored: Optional[SymMatrix] = None
    C: Optional[LowerTriangular] = None
    V_bar: Optional[np.ndarray] = None
    replaced: List[int] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.V.shape[1]

    def whiten(self, epsilon: float = 1e-4) -> "KrylovBasis":
        """Floors H̄ and rotates the basis, in place; returns self."""
        self.H_floored = floor_eigenvalues(self.H_bar, epsilon)
        self.C, self.V_bar = rotate_basis(self.V, self.H_floored)
        return self


def _orthonormalize(u: np.ndarray, columns: List[np.ndarray]) -> Optional[np.ndarray]:
    """Modified Gram-Schmidt against `columns`, two passes.

    Returns None when what's left is negligible next to the original.
    """
    norm0 = float(np.linalg.norm(u))
    if not norm0 > 0:
        return None

    u = u.copy()
    for _ in range(2):
        for v in columns:
            u -= (u @ v) * v

    norm = float(np.linalg.norm(u))
    if norm < DEGENERATE_RATIO * norm0:
        return None
    return u / norm


def _replacement(columns: List[np.ndarray], seed: int) -> Optional[np.ndarray]:
    rng = np.random.default_rng([seed, len(columns)])
    return _orthonormalize(rng.standard_normal(len(columns[0])), columns)


def build_basis(
    curvature: CurvatureFn,
    grad: np.ndarray,
    precond: Preconditioner,
    K: int,
    d_prev: np.ndarray,
    seed: int = 0,
) -> KrylovBasis:
    """Orthonormal basis of the preconditioned Krylov space augmented
    with the previous step, and the reduced curvature in it.

    Column 1 is D⁻¹g normalized; each following Krylov column is the
    curvature applied to the newest column, then D⁻¹, then
    orthogonalized against everything so far. Column K+1 is d_prev
    orthogonalized. The product with each column also fills that
    column's row of H̄, so a full basis costs exactly K+1 products.

    A column that collapses under orthogonalization is replaced by a
    seeded random direction; if that collapses too the space is
    exhausted and the basis comes out smaller.

    :curvature: callable v ↦ Bv
    :grad: gradient g
    :precond: Preconditioner D
    :K: Krylov dimension, >= 1
    :d_prev: previous step, any nonzero vector on the first iteration
    :seed: int seeds replacement directions
    :return: KrylovBasis

    Raises:
    - ZeroGradient
    - InvalidInput
    - NumericalOverflow
    """
    grad = np.asarray(grad, dtype=np.float64)
    d_prev = np.asarray(d_prev, dtype=np.float64)

    if K < 1:
        raise InvalidInput(f"K must be at least 1, got {K}")

    if grad.shape != d_prev.shape or len(precond) != grad.size:
        raise InvalidInput(
            f"grad {grad.shape}, d_prev {d_prev.shape}, preconditioner {len(precond)}"
        )

    if not np.all(np.isfinite(grad)):
        raise NumericalOverflow("non-finite gradient")

    first = _orthonormalize(precond.solve(grad), [])
    if first is None:
        raise ZeroGradient("gradient is zero")

    columns = [first]
    rows: List[np.ndarray] = []
    replaced: List[int] = []
    krylov_open = True
    d_prev_used = False

    while len(rows) < len(columns):
        k = len(rows)
        w = np.asarray(curvature(columns[k]), dtype=np.float64)

        if not np.all(np.isfinite(w)):
            raise NumericalOverflow(f"non-finite curvature product for column {k}")

        rows.append(np.array([w @ columns[j] for j in range(k + 1)]))

        candidate: Optional[np.ndarray] = None
        if krylov_open and len(columns) < K:
            candidate = _orthonormalize(precond.solve(w), columns)
            if candidate is None:
                candidate = _replacement(columns, seed)
                if candidate is None:
                    logger.debug(f"krylov space exhausted at {len(columns)} columns")
                    krylov_open = False
                else:
                    replaced.append(len(columns))
                    logger.debug(f"column {len(columns)} degenerate, replaced")

        if candidate is None and not d_prev_used and (len(columns) >= K or not krylov_open):
            d_prev_used = True
            candidate = _orthonormalize(d_prev, columns)
            if candidate is None:
                candidate = _replacement(columns, seed)
                if candidate is not None:
                    replaced.append(len(columns))
                    logger.debug(f"previous step inside the span, replaced")

        if candidate is not None:
            columns.append(candidate)

    dim = len(columns)
    H = np.zeros((dim, dim))
    for k, row in enumerate(rows):
        H[k, : k + 1] = row

    V = np.column_stack(columns)
    logger.debug(f"basis {V.shape} with {len(rows)} curvature products")
    return KrylovBasis(V, as_symmetric(H), replaced=replaced)


def floor_eigenvalues(H_bar: SymMatrix, epsilon: float = 1e-4) -> SymMatrix:
    """Q diag(max(λ, ε·λmax)) Qᵀ.

    When no eigenvalue is positive every eigenvalue becomes
    ε·max|λ|, so the result is always positive definite.

    :H_bar: SymMatrix
    :epsilon: float in (0, 1)
    :return: SymMatrix

    Raises:
    - InvalidInput
    - DegenerateCurvature
    """
    if not 0 < epsilon < 1:
        raise InvalidInput(f"epsilon must lie in (0, 1), got {epsilon}")

    eigenvalues, Q = sym_eig(H_bar)
    top = float(eigenvalues[-1])
    magnitude = float(np.max(np.abs(eigenvalues)))

    if magnitude == 0.0:
        raise DegenerateCurvature("reduced curvature is all zero")

    if top <= 0:
        logger.debug(f"no positive eigenvalue (max {top:.3g}); flat floor")
        floored = np.full_like(eigenvalues, epsilon * magnitude)
    else:
        floor = epsilon * top
        logger.debug(
            f"eigen floor {floor:.3g}: {np.count_nonzero(eigenvalues < floor)} raised"
        )
        floored = np.maximum(eigenvalues, floor)

    return as_symmetric((Q * floored) @ Q.T)


def rotate_basis(V: np.ndarray, H_floored: SymMatrix) -> Tuple[LowerTriangular, np.ndarray]:
    """C = cholesky(Ĥ) and V̄ = V C⁻ᵀ.

    Raises:
    - NotPositiveDefinite
    - InvalidInput
    """
    C = cholesky(H_floored)
    return C, right_solve_transposed(V, C)

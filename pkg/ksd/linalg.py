"""Small Dense Linear Algebra

Kernels for the reduced, (K+1)-dimensional problems built by the
subspace code. Everything here runs in float64 regardless of what the
caller hands in, since the eigenvalue flooring and the Cholesky factor
are sensitive to conditioning.
"""

from typing import Tuple

import numpy as np
import scipy.linalg

from loguru import logger

from .exceptions import InvalidInput, NotPositiveDefinite

SymMatrix = np.ndarray
LowerTriangular = np.ndarray

MAX_DIM = 1024


def as_symmetric(m: np.ndarray) -> SymMatrix:
    """Returns a float64 copy of the square matrix `m` whose upper
    triangle has been replaced by the transpose of its lower triangle.

    The lower triangle is authoritative.

    Raises:
    - InvalidInput
    """
    m = np.array(m, dtype=np.float64)

    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InvalidInput(f"expected a non-empty square matrix, got shape {m.shape}")

    if not np.all(np.isfinite(m)):
        raise InvalidInput("matrix has non-finite entries")

    lower = np.tril(m)
    return lower + np.tril(m, -1).T


def sym_eig(m: SymMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns eigenvalues in ascending order and a matrix whose columns
    are the matching orthonormal eigenvectors, so that
    m == Q @ diag(λ) @ Q.T.

    :m: SymMatrix
    :return: (eigenvalues, eigenvectors)

    Raises:
    - InvalidInput
    """
    m = as_symmetric(m)

    if m.shape[0] > MAX_DIM:
        raise InvalidInput(f"dimension {m.shape[0]} exceeds {MAX_DIM}")

    eigenvalues, eigenvectors = scipy.linalg.eigh(m, lower=True)
    return eigenvalues, eigenvectors


def cholesky(m: SymMatrix) -> LowerTriangular:
    """Lower triangular C with C @ C.T == m.

    :m: SymMatrix, positive definite
    :return: LowerTriangular

    Raises:
    - InvalidInput
    - NotPositiveDefinite
    """
    m = as_symmetric(m)

    try:
        c = scipy.linalg.cholesky(m, lower=True, check_finite=False)
    except np.linalg.LinAlgError as error:
        logger.debug(f"cholesky failed: {error}")
        pivot = _first_bad_pivot(m)
        raise NotPositiveDefinite(pivot, float(m[pivot, pivot])) from None

    if np.any(np.diag(c) <= 0):
        pivot = int(np.argmin(np.diag(c)))
        raise NotPositiveDefinite(pivot, float(c[pivot, pivot]))

    return c


def _first_bad_pivot(m: SymMatrix) -> int:
    """Index of the first leading minor that fails to be positive definite."""
    for k in range(1, m.shape[0] + 1):
        try:
            np.linalg.cholesky(m[:k, :k])
        except np.linalg.LinAlgError:
            return k - 1
    return m.shape[0] - 1


def right_solve_transposed(v: np.ndarray, c: LowerTriangular) -> np.ndarray:
    """Returns X with X @ c.T == v, i.e. v @ inv(c).T, by triangular
    substitution; the inverse is never formed.

    :v: n×d matrix
    :c: d×d lower triangular with positive diagonal
    :return: n×d matrix

    Raises:
    - InvalidInput
    """
    v = np.asarray(v, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)

    if v.ndim != 2 or c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise InvalidInput(f"bad shapes v={v.shape} c={c.shape}")

    if v.shape[1] != c.shape[0]:
        raise InvalidInput(f"v has {v.shape[1]} columns, c is {c.shape[0]} square")

    # X c^T = V  <=>  c X^T = V^T
    return scipy.linalg.solve_triangular(c, v.T, lower=True).T

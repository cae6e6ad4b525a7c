"""Krylov Subspace Descent for Feedforward Networks

"""

from .__version__ import __version__

from .exceptions import (
    ConfigError,
    DegenerateCurvature,
    FormatError,
    InvalidInput,
    InvalidPlan,
    InvalidStart,
    KsdError,
    NotPositiveDefinite,
    NumericalError,
    NumericalOverflow,
    ZeroGradient,
)

from .network import Batch, LossKind, NetworkSpec, Nonlinearity, Sample
from .curvature import CurvatureKind, CurvatureOperator
from .subspace import KrylovBasis, Preconditioner, build_basis
from .optimizers import Optimizers

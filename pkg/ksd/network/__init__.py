""" Feedforward Networks
"""

from .spec import (
    LossKind,
    NetworkSpec,
    Nonlinearity,
    ParameterLayout,
    ParameterVector,
)

from .batch import Batch, Sample

from .mlp import (
    Activations,
    check_batch,
    classification_error,
    fisher_diagonal,
    forward,
    gradient,
    init_params,
    loss,
    objective,
    objective_and_gradient,
)

__all__ = [
    "Activations",
    "Batch",
    "LossKind",
    "NetworkSpec",
    "Nonlinearity",
    "ParameterLayout",
    "ParameterVector",
    "Sample",
    "check_batch",
    "classification_error",
    "fisher_diagonal",
    "forward",
    "gradient",
    "init_params",
    "loss",
    "objective",
    "objective_and_gradient",
]

""" Optimizers
"""

from .optimizer import BaseOptimizer as Optimizers
from .optimizer import OptimizerState

from .models import (
    ConvergenceRecord,
    HfConfig,
    KsdConfig,
    LbfgsConfig,
    OptimizerConfig,
    SgdConfig,
)

from .bfgs import BfgsResult, bfgs_minimize
from .cg import CgResult, preconditioned_cg

from .ksd import KrylovSubspaceDescent, ksd_run, subspace_objective
from .hf import HfOptimizer, hf_run, reduction_ratio, update_damping
from .sgd import SgdOptimizer, sgd_run
from .lbfgs import LbfgsOptimizer, lbfgs_run, two_loop

__all__ = [
    "BfgsResult",
    "CgResult",
    "ConvergenceRecord",
    "HfConfig",
    "HfOptimizer",
    "KrylovSubspaceDescent",
    "KsdConfig",
    "LbfgsConfig",
    "LbfgsOptimizer",
    "OptimizerConfig",
    "OptimizerState",
    "Optimizers",
    "SgdConfig",
    "SgdOptimizer",
    "bfgs_minimize",
    "hf_run",
    "ksd_run",
    "lbfgs_run",
    "preconditioned_cg",
    "reduction_ratio",
    "sgd_run",
    "subspace_objective",
    "two_loop",
    "update_damping",
]

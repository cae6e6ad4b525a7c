"""Optimizer Settings and Records
"""

import math

from typing import Optional

from pydantic import BaseModel, Field

from ..curvature import CurvatureKind


class OptimizerConfig(BaseModel):
    l2_coeff: float = Field(1e-5, ge=0)
    seed: int = 0


class KsdConfig(OptimizerConfig):
    krylov_dim: int = Field(20, ge=1)
    bfgs_iterations: int = Field(30, ge=1)
    floor_epsilon: float = Field(1e-4, gt=0, lt=1)
    curvature: CurvatureKind = CurvatureKind.gauss_newton


class HfConfig(OptimizerConfig):
    initial_lambda: float = Field(1.0, gt=0)
    increase: float = Field(1.5, gt=1)
    decrease: float = Field(1.5, gt=1)
    max_cg: int = Field(250, ge=1)
    cg_tolerance: float = Field(1e-4, gt=0)
    floor_epsilon: float = Field(1e-4, gt=0, lt=1)
    curvature: CurvatureKind = CurvatureKind.gauss_newton


class SgdConfig(OptimizerConfig):
    learning_rate: float = Field(0.1, ge=0)
    decay: float = Field(0.0, ge=0)
    minibatch: int = Field(100, ge=1)


class LbfgsConfig(OptimizerConfig):
    window: int = Field(10, ge=1)


class ConvergenceRecord(BaseModel):
    """One row of a convergence curve.

    Objectives and error are None when they weren't measured.
    """

    iteration: int = Field(..., ge=0)
    seconds: float = Field(..., ge=0)
    train_obj: float
    valid_obj: Optional[float] = None
    valid_err_pct: Optional[float] = None

    @property
    def monitored(self) -> float:
        """Validation objective when there is one, else training objective."""
        if self.valid_obj is None or math.isnan(self.valid_obj):
            return self.train_obj
        return self.valid_obj

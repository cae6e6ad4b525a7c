"""Experiment Models
"""

from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field

from ..curvature import CurvatureKind
from ..data.subsets import SampleMode, SubsetPlan
from ..network import LossKind, NetworkSpec
from ..optimizers import HfConfig, KsdConfig, LbfgsConfig, OptimizerConfig, SgdConfig


class DatasetName(str, Enum):
    mnist = "mnist"
    curves = "curves"

    @property
    def has_labels(self) -> bool:
        return self is DatasetName.mnist


class OptimizerName(str, Enum):
    ksd = "ksd"
    hf = "hf"
    sgd = "sgd"
    lbfgs = "lbfgs"

    @property
    def uses_subsets(self) -> bool:
        return self in (OptimizerName.ksd, OptimizerName.hf)


REQUIRED_KEYS = ("dataset", "model", "loss", "optimizer")


class ExperimentConfig(BaseModel):
    dataset: DatasetName
    model: str
    loss: LossKind
    optimizer: OptimizerName

    train_images: Optional[str] = None
    train_labels: Optional[str] = None
    test_images: Optional[str] = None
    test_labels: Optional[str] = None
    num_samples: Optional[int] = Field(None, ge=1)
    binarize: bool = True
    validation_fraction: float = Field(0.1, gt=0, lt=1)
    curves_samples: int = Field(2000, ge=2)
    curves_resolution: int = Field(28, ge=2)
    mirror: bool = False

    seed: int = 0
    max_iterations: int = Field(100, ge=1)
    patience: int = Field(10, ge=1)
    l2_coeff: float = Field(1e-5, ge=0)
    init_scale: float = Field(1.0, gt=0)
    curvature: CurvatureKind = CurvatureKind.gauss_newton
    output_csv: str = "convergence.csv"
    summary_json: Optional[str] = None

    krylov_dim: int = Field(20, ge=1)
    bfgs_iterations: int = Field(30, ge=1)
    floor_epsilon: float = Field(1e-4, gt=0, lt=1)

    a_mode: SampleMode = SampleMode.full
    a_fraction: float = Field(1.0, gt=0, le=1)
    b_fraction: Optional[float] = Field(None, gt=0, le=1)
    c_fraction: Optional[float] = Field(None, gt=0, le=1)
    disjoint_bc: bool = True

    hf_initial_lambda: float = Field(1.0, gt=0)
    hf_increase: float = Field(1.5, gt=1)
    hf_decrease: float = Field(1.5, gt=1)
    hf_max_cg: int = Field(250, ge=1)
    hf_cg_tolerance: float = Field(1e-4, gt=0)

    sgd_learning_rate: float = Field(0.1, ge=0)
    sgd_decay: float = Field(0.0, ge=0)
    sgd_minibatch: int = Field(100, ge=1)

    lbfgs_window: int = Field(10, ge=1)

    @classmethod
    def keys(cls):
        fields = getattr(cls, "model_fields", None) or cls.__fields__
        return tuple(fields)

    @property
    def name(self) -> str:
        return Path(self.output_csv).stem

    def network_spec(self) -> NetworkSpec:
        """
        Raises:
        - InvalidInput
        """
        return NetworkSpec.from_string(self.model, self.loss, self.mirror)

    def subset_plan(self) -> SubsetPlan:
        fraction = 1.0 / self.krylov_dim
        return SubsetPlan(
            a_mode=self.a_mode,
            a_fraction=self.a_fraction,
            b_fraction=self.b_fraction if self.b_fraction is not None else fraction,
            c_fraction=self.c_fraction if self.c_fraction is not None else fraction,
            disjoint_bc=self.disjoint_bc,
            seed=self.seed,
        )

    def optimizer_config(self) -> OptimizerConfig:
        common = dict(l2_coeff=self.l2_coeff, seed=self.seed)

        if self.optimizer is OptimizerName.ksd:
            return KsdConfig(
                krylov_dim=self.krylov_dim,
                bfgs_iterations=self.bfgs_iterations,
                floor_epsilon=self.floor_epsilon,
                curvature=self.curvature,
                **common,
            )

        if self.optimizer is OptimizerName.hf:
            return HfConfig(
                initial_lambda=self.hf_initial_lambda,
                increase=self.hf_increase,
                decrease=self.hf_decrease,
                max_cg=self.hf_max_cg,
                cg_tolerance=self.hf_cg_tolerance,
                floor_epsilon=self.floor_epsilon,
                curvature=self.curvature,
                **common,
            )

        if self.optimizer is OptimizerName.sgd:
            return SgdConfig(
                learning_rate=self.sgd_learning_rate,
                decay=self.sgd_decay,
                minibatch=self.sgd_minibatch,
                **common,
            )

        return LbfgsConfig(window=self.lbfgs_window, **common)


class Summary(BaseModel):
    """End-of-run figures for one experiment.

    Best values are column minima over the convergence records.
    """

    name: str
    optimizer: OptimizerName
    curvature: CurvatureKind
    best_valid_obj: Optional[float] = None
    best_valid_err_pct: Optional[float] = None
    best_iteration: int = 0
    final_train_obj: float
    final_train_err_pct: Optional[float] = None
    total_seconds: float = 0.0
    iterations: int = 0
    stopped_early: bool = False
    test_obj: Optional[float] = None
    test_err_pct: Optional[float] = None

"""Experiment Runner
"""

import json
import math

from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from loguru import logger
from pydantic import BaseModel

from ..data import Dataset, Split, binarize, generate_curves, load_idx
from ..exceptions import ConfigError
from ..network import ParameterVector, classification_error, init_params, objective
from ..optimizers import ConvergenceRecord, Optimizers
from ..optimizers.optimizer import BaseOptimizer
from .models import DatasetName, ExperimentConfig, OptimizerName, Summary
from .records import write_csv


class EarlyStopping:
    """Stops once the monitored objective has failed to improve on its
    best value for `patience` consecutive records.

    The parameters that produced the best value are kept.
    """

    def __init__(self, patience: int = 10) -> None:
        self.patience = patience
        self.best: Optional[ConvergenceRecord] = None
        self.best_theta: Optional[ParameterVector] = None
        self.bad = 0
        self.stopped = False

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(patience={self.patience})"

    def __call__(self, record: ConvergenceRecord, theta: ParameterVector) -> bool:
        if self.best is None or record.monitored < self.best.monitored:
            self.best = record
            self.best_theta = np.array(theta, copy=True)
            self.bad = 0
            return False

        self.bad += 1
        if self.bad >= self.patience:
            logger.info(
                f"early stop at iteration {record.iteration}, "
                f"best was {self.best.iteration}"
            )
            self.stopped = True
        return self.stopped


def load_datasets(config: ExperimentConfig) -> Tuple[Dataset, Dataset, Optional[Dataset]]:
    """Training, validation and (if configured) test data.

    Raises:
    - ConfigError
    - FormatError
    """
    autoencoder = not config.loss.is_classification
    test: Optional[Dataset] = None

    if config.dataset is DatasetName.mnist:
        if not config.train_images:
            raise ConfigError("mnist needs train_images", key="train_images")
        if not autoencoder and not config.train_labels:
            raise ConfigError("classification needs train_labels", key="train_labels")

        data = load_idx(config.train_images, config.train_labels, autoencoder)
        if config.test_images:
            test = load_idx(config.test_images, config.test_labels, autoencoder, Split.test)
    else:
        data = generate_curves(config.curves_samples, config.curves_resolution, config.seed)

    if config.num_samples:
        data = data.head(config.num_samples)

    if config.binarize:
        data = binarize(data)
        test = binarize(test) if test is not None else None

    train, valid = data.split_validation(config.validation_fraction)
    logger.debug(f"{train!s}, {valid!s}, test {test!s}")
    return train, valid, test


def build_optimizer(config: ExperimentConfig, spec, train: Dataset) -> BaseOptimizer:
    cls = Optimizers.for_name(config.optimizer.value)
    if config.optimizer.uses_subsets:
        return cls(spec, train, config.optimizer_config(), config.subset_plan())
    return cls(spec, train, config.optimizer_config())


def _column_min(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None and not math.isnan(v)]
    return min(present) if present else None


def run_experiment(config: ExperimentConfig, name: Optional[str] = None) -> Summary:
    """Runs one configured experiment.

    Writes the convergence CSV (and the summary JSON when configured)
    and returns the summary. The test split, when present, is scored
    with the parameters that did best on validation data.

    Raises:
    - ConfigError
    - FormatError
    - InvalidInput
    - InvalidPlan
    - NumericalError
    """
    spec = config.network_spec()
    train, valid, test = load_datasets(config)
    logger.info(f"{config.optimizer.value} on {spec!s}: {len(train)} train, {len(valid)} valid")

    optimizer = build_optimizer(config, spec, train)
    theta = init_params(spec, config.seed, config.init_scale)
    stopper = EarlyStopping(config.patience)

    theta_final, history = optimizer.run(theta, config.max_iterations, valid, stopper)

    if not history:
        record = optimizer.record(theta_final, 0, 0.0, valid)
        stopper(record, theta_final)
        history = [record]

    write_csv(history, config.output_csv)

    best = stopper.best
    best_theta = stopper.best_theta
    summary = Summary(
        name=name or config.name,
        optimizer=config.optimizer,
        curvature=config.curvature,
        best_valid_obj=_column_min([r.valid_obj for r in history]),
        best_valid_err_pct=_column_min([r.valid_err_pct for r in history]),
        best_iteration=best.iteration,
        final_train_obj=history[-1].train_obj,
        total_seconds=history[-1].seconds,
        iterations=history[-1].iteration,
        stopped_early=stopper.stopped,
    )

    if spec.loss_kind.is_classification:
        summary.final_train_err_pct = classification_error(spec, theta_final, train)

    if test is not None:
        summary.test_obj = objective(spec, best_theta, test, config.l2_coeff)
        if spec.loss_kind.is_classification:
            summary.test_err_pct = classification_error(spec, best_theta, test)

    if config.summary_json:
        Path(config.summary_json).write_text(json.dumps(dict(summary), indent=2, default=str))

    logger.info(f"{summary.name}: {dict(summary)}")
    return summary


class ComparisonRow(BaseModel):
    name: str
    optimizer: OptimizerName
    train_obj: float
    valid_obj: Optional[float] = None
    valid_err_pct: Optional[float] = None
    seconds: float
    relative_time: Optional[float] = None


def compare(summaries: Sequence[Summary]) -> List[ComparisonRow]:
    """Rows for a results table; time is relative to the first HF run."""
    reference = next(
        (s.total_seconds for s in summaries if s.optimizer is OptimizerName.hf), None
    )

    rows = []
    for summary in summaries:
        relative = None
        if reference:
            relative = summary.total_seconds / reference
        rows.append(
            ComparisonRow(
                name=summary.name,
                optimizer=summary.optimizer,
                train_obj=summary.final_train_obj,
                valid_obj=summary.best_valid_obj,
                valid_err_pct=summary.best_valid_err_pct,
                seconds=summary.total_seconds,
                relative_time=relative,
            )
        )
    return rows

""" Experiment Harness
"""

from .models import DatasetName, ExperimentConfig, OptimizerName, Summary
from .config import parse_config
from .records import HEADER, read_csv, write_csv
from .runner import ComparisonRow, EarlyStopping, compare, load_datasets, run_experiment
from .oracles import OracleResult, run_oracles

__all__ = [
    "ComparisonRow",
    "DatasetName",
    "EarlyStopping",
    "ExperimentConfig",
    "HEADER",
    "OptimizerName",
    "OracleResult",
    "Summary",
    "compare",
    "load_datasets",
    "parse_config",
    "read_csv",
    "run_experiment",
    "run_oracles",
    "write_csv",
]

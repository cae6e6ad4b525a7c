"""
"""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List

import typer

from loguru import logger

from .__version__ import __version__
from .data import generate_curves, save_idx_images
from .exceptions import ConfigError, KsdError, NumericalError
from .harness import ExperimentConfig, Summary, compare, parse_config, run_experiment, run_oracles

cli = typer.Typer()

CONFIG_ERROR = 1
NUMERICAL_ERROR = 2


def report_version(value: bool) -> None:
    """Prints the version string and exits."""
    if value:
        typer.secho(__version__, fg="blue")
        raise typer.Exit()


def fail(error: KsdError) -> None:
    """Reports `error` and exits with the matching code."""
    logger.error(f"{error!r}")
    typer.secho(str(error), fg="red")
    code = NUMERICAL_ERROR if isinstance(error, NumericalError) else CONFIG_ERROR
    raise typer.Exit(code=code) from None


def load_configs(paths: List[Path]) -> List[ExperimentConfig]:
    try:
        return [parse_config(path) for path in paths]
    except ConfigError as error:
        fail(error)


def run_all(configs: List[ExperimentConfig], jobs: int) -> List[Summary]:
    try:
        if jobs > 1 and len(configs) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                return list(pool.map(run_experiment, configs))
        return [run_experiment(config) for config in configs]
    except KsdError as error:
        fail(error)


@cli.callback()
def global_callback(
    ctx: typer.Context,
    debug: bool = typer.Option(False, "--debug", "-D", is_flag=True),
    version: bool = typer.Option(
        False,
        "--version",
        is_flag=True,
        is_eager=True,
        callback=report_version,
    ),
) -> None:
    """Train feedforward networks with Krylov Subspace Descent and friends."""

    (logger.enable if debug else logger.disable)("ksd")
    logger.debug(f"version {__version__}")


@cli.command(name="run")
def run_experiments(
    configs: List[Path] = typer.Argument(..., exists=True, dir_okay=False),
    jobs: int = typer.Option(1, "--jobs", "-j", min=1, help="experiments run at once"),
) -> None:
    """Run experiments described by CONFIG files.

    Each run writes its convergence CSV (and summary JSON, if asked
    for) to the paths named in its config.
    """
    logger.debug(f"configs={configs} jobs={jobs}")

    for summary in run_all(load_configs(configs), jobs):
        typer.secho(f"{summary.name:>20s} ", nl=False, fg="blue")
        typer.secho(
            f"train {summary.final_train_obj:.6g}  "
            f"valid {summary.best_valid_obj}  "
            f"err {summary.best_valid_err_pct}  "
            f"{summary.total_seconds:.1f}s",
            fg="green",
        )


@cli.command(name="gen-curves")
def generate_curves_dataset(
    out_dir: Path = typer.Argument(..., file_okay=False),
    samples: int = typer.Option(2000, "--samples", "-n", min=1),
    seed: int = typer.Option(0, "--seed", "-s"),
    resolution: int = typer.Option(28, "--resolution", "-r", min=2),
) -> None:
    """Write a synthetic curves dataset as an IDX image file."""

    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "curves-images-idx3-ubyte"

    try:
        dataset = generate_curves(samples, resolution, seed)
        save_idx_images(path, dataset.inputs, resolution)
    except KsdError as error:
        fail(error)

    typer.secho(f"{samples} curves -> {path}", fg="green")


@cli.command(name="selftest")
def selftest() -> None:
    """Check gradients, curvature products and the Krylov basis
    against finite differences and explicit matrices."""

    results = run_oracles()

    for result in results:
        if result.passed:
            typer.secho("PASS ", nl=False, fg="green")
        else:
            typer.secho("FAIL ", nl=False, fg="red")
        typer.secho(f"{result.name:>20s} ", nl=False, fg="blue")
        typer.secho(result.detail)

    if not all(result.passed for result in results):
        raise typer.Exit(code=NUMERICAL_ERROR)


@cli.command(name="compare")
def compare_experiments(
    configs: List[Path] = typer.Argument(..., exists=True, dir_okay=False),
    jobs: int = typer.Option(1, "--jobs", "-j", min=1),
) -> None:
    """Run experiments and tabulate them, time relative to HF."""

    rows = compare(run_all(load_configs(configs), jobs))

    typer.secho(
        f"{'name':>20s} {'opt':>6s} {'train':>12s} {'valid':>12s} {'err%':>8s} {'time':>8s}",
        fg="blue",
    )
    for row in rows:
        relative = f"{row.relative_time:.2f}" if row.relative_time is not None else "-"
        err = f"{row.valid_err_pct:.2f}" if row.valid_err_pct is not None else "-"
        valid = f"{row.valid_obj:.6g}" if row.valid_obj is not None else "-"
        typer.secho(
            f"{row.name:>20s} {row.optimizer.value:>6s} {row.train_obj:12.6g} "
            f"{valid:>12s} {err:>8s} {relative:>8s}"
        )


if __name__ == "__main__":
    exit(cli())

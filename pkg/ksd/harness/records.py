"""Convergence CSV

    iter,seconds,train_obj,valid_obj,valid_err_pct

One row per record, numbers with 9 significant digits, `nan` for
values that weren't measured, `\\n` line endings.
"""

import csv
import math

from pathlib import Path
from typing import Iterable, List, Optional, Union

from loguru import logger

from ..exceptions import FormatError
from ..optimizers import ConvergenceRecord

HEADER = ("iter", "seconds", "train_obj", "valid_obj", "valid_err_pct")


def _format(value: Optional[float]) -> str:
    if value is None:
        return "nan"
    return f"{value:.9g}"


def _parse(text: str) -> Optional[float]:
    value = float(text)
    return None if math.isnan(value) else value


def write_csv(records: Iterable[ConvergenceRecord], path: Union[str, Path]) -> None:
    """Raises OSError when the file can't be written."""
    path = Path(path)
    count = 0
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for record in records:
            writer.writerow(
                [
                    str(record.iteration),
                    _format(record.seconds),
                    _format(record.train_obj),
                    _format(record.valid_obj),
                    _format(record.valid_err_pct),
                ]
            )
            count += 1
    logger.debug(f"wrote {count} records to {path}")


def read_csv(path: Union[str, Path]) -> List[ConvergenceRecord]:
    """
    Raises:
    - FormatError
    """
    path = Path(path)
    records: List[ConvergenceRecord] = []

    with path.open(newline="") as handle:
        rows = csv.reader(handle)
        header = next(rows, None)
        if header is None or tuple(header) != HEADER:
            raise FormatError(f"unexpected header {header}", path, 1)

        for lineno, row in enumerate(rows, start=2):
            if len(row) != len(HEADER):
                raise FormatError(f"expected {len(HEADER)} columns, got {len(row)}", path, lineno)
            try:
                records.append(
                    ConvergenceRecord(
                        iteration=int(row[0]),
                        seconds=float(row[1]),
                        train_obj=float(row[2]),
                        valid_obj=_parse(row[3]),
                        valid_err_pct=_parse(row[4]),
                    )
                )
            except ValueError as error:
                raise FormatError(str(error), path, lineno) from None

    return records

"""Samples and Batches
"""

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Sequence, Union

import numpy as np

from ..exceptions import InvalidInput


class Sample(NamedTuple):
    """One input vector and its target: a class index or a vector."""

    x: np.ndarray
    y: Union[int, np.ndarray]


@dataclass
class Batch:
    """Row-stacked inputs and targets.

    Targets are an integer vector of class indices for classification
    or a float matrix with one row per sample otherwise.
    """

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self) -> None:
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        targets = np.asarray(self.targets)
        if not np.issubdtype(targets.dtype, np.integer):
            targets = targets.astype(np.float64)
            if targets.ndim == 1 and len(self.inputs) == 1:
                targets = targets.reshape(1, -1)
        self.targets = targets

        if len(self.targets) != len(self.inputs):
            raise InvalidInput(
                f"{len(self.inputs)} inputs but {len(self.targets)} targets"
            )

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "Batch":
        if not samples:
            raise InvalidInput("no samples")
        inputs = np.stack([np.asarray(s.x, dtype=np.float64) for s in samples])
        if np.ndim(samples[0].y) == 0:
            targets = np.array([int(s.y) for s in samples], dtype=np.int64)
        else:
            targets = np.stack([np.asarray(s.y, dtype=np.float64) for s in samples])
        return cls(inputs, targets)

    def __len__(self) -> int:
        return len(self.inputs)

    def __iter__(self) -> Iterator[Sample]:
        for x, y in zip(self.inputs, self.targets):
            yield Sample(x, y)

    @property
    def is_classification(self) -> bool:
        return bool(np.issubdtype(self.targets.dtype, np.integer))

    def take(self, indices: Sequence[int]) -> "Batch":
        """A new batch holding the rows at `indices`, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Batch(self.inputs[indices], self.targets[indices])

    def repeat(self, times: int) -> "Batch":
        """Each sample `times` times in a row; handy for normalization checks."""
        return Batch(
            np.repeat(self.inputs, times, axis=0),
            np.repeat(self.targets, times, axis=0),
        )

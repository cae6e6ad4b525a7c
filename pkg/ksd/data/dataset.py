"""Datasets
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Tuple

import numpy as np

from loguru import logger

from ..exceptions import InvalidInput
from ..network import Batch


class Split(str, Enum):
    train = "train"
    validation = "validation"
    test = "test"


@dataclass
class Dataset(Batch):
    """A Batch that knows which split it belongs to.

    Inputs are pixel intensities in [0, 1]. Autoencoder datasets carry
    their inputs again as targets.
    """

    split: Split = Split.train

    def __post_init__(self) -> None:
        super().__post_init__()
        self.split = Split(self.split)

    def __str__(self) -> str:
        return f"{self.split.value}: {len(self)} x {self.input_dim}"

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def is_autoencoder(self) -> bool:
        return self.targets.shape == self.inputs.shape and np.array_equal(
            self.targets, self.inputs
        )

    def take(self, indices: Sequence[int]) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.inputs[indices], self.targets[indices], self.split)

    def head(self, n: int) -> "Dataset":
        """The first `n` samples, or all of them if there are fewer."""
        if n < 1:
            raise InvalidInput(f"head needs a positive count, got {n}")
        return self.take(np.arange(min(n, len(self))))

    def split_validation(self, fraction: float = 0.1) -> Tuple["Dataset", "Dataset"]:
        """Carves the last `fraction` of the samples off as validation data.

        Raises:
        - InvalidInput if either part would be empty
        """
        if not 0 < fraction < 1:
            raise InvalidInput(f"validation fraction must lie in (0, 1), got {fraction}")

        num_valid = int(np.floor(len(self) * fraction))
        num_train = len(self) - num_valid

        if num_valid < 1 or num_train < 1:
            raise InvalidInput(
                f"can't split {len(self)} samples with fraction {fraction}"
            )

        logger.debug(f"split {len(self)} into {num_train} train / {num_valid} valid")

        train = self.take(np.arange(num_train))
        valid = self.take(np.arange(num_train, len(self)))
        valid.split = Split.validation
        return train, valid


def binarize(dataset: Dataset, threshold: float = 0.5) -> Dataset:
    """Maps inputs above `threshold` to 1 and the rest to 0.

    Autoencoder targets follow their inputs. Applying it twice is the
    same as applying it once.
    """
    inputs = (dataset.inputs > threshold).astype(np.float64)
    targets = inputs if dataset.is_autoencoder else dataset.targets
    return Dataset(inputs, targets, dataset.split)

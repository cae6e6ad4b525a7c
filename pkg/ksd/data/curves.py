"""Synthetic Curves

Binary images of random curves, used as an autoencoding dataset.

Each curve is a cubic Bézier whose four control points are (P0, P1,
P1, P2) for three points drawn uniformly from the unit square. The
curve is sampled densely and every pixel a sample lands in is set.
"""

import numpy as np

from loguru import logger

from ..exceptions import InvalidInput
from .dataset import Dataset, Split

SAMPLES_PER_PIXEL = 4


def bezier_points(controls: np.ndarray, num_points: int) -> np.ndarray:
    """Points along cubic Béziers.

    :controls: array (n, 4, 2) of control points
    :num_points: int samples per curve, endpoints included
    :return: array (n, num_points, 2)
    """
    t = np.linspace(0.0, 1.0, num_points)[None, :, None]
    p0, p1, p2, p3 = (controls[:, None, k, :] for k in range(4))
    s = 1.0 - t
    return s ** 3 * p0 + 3 * s ** 2 * t * p1 + 3 * s * t ** 2 * p2 + t ** 3 * p3


def generate_curves(
    num_samples: int,
    resolution: int = 28,
    seed: int = 0,
    split: Split = Split.train,
) -> Dataset:
    """Autoencoder dataset of `num_samples` rasterized curves.

    Inputs and targets are the same resolution² binary vectors. The
    same (num_samples, resolution, seed) always gives the same data.

    Raises:
    - InvalidInput
    """
    if num_samples < 1:
        raise InvalidInput(f"need at least one sample, got {num_samples}")

    if resolution < 2:
        raise InvalidInput(f"resolution must be at least 2, got {resolution}")

    rng = np.random.default_rng(seed)
    anchors = rng.uniform(0.0, 1.0, size=(num_samples, 3, 2))
    controls = anchors[:, [0, 1, 1, 2], :]

    points = bezier_points(controls, SAMPLES_PER_PIXEL * resolution)
    cells = np.minimum((points * resolution).astype(np.int64), resolution - 1)

    images = np.zeros((num_samples, resolution, resolution))
    rows = np.repeat(np.arange(num_samples), cells.shape[1])
    images[rows, cells[..., 1].ravel(), cells[..., 0].ravel()] = 1.0

    inputs = images.reshape(num_samples, -1)
    logger.debug(
        f"{num_samples} curves at {resolution}x{resolution}, "
        f"mean {inputs.sum(axis=1).mean():.1f} active pixels"
    )
    return Dataset(inputs, inputs, split)

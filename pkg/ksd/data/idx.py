"""IDX Files

Reader and writer for the big-endian IDX format MNIST ships in:

    magic (u32) | dims (u32 each) | payload (u8)

Images use magic 0x00000803 with three dims (count, rows, cols);
labels use 0x00000801 with one dim (count). Paths ending in `.gz` are
gzip compressed.
"""

import gzip

from pathlib import Path
from typing import Optional, Union

import numpy as np

from loguru import logger

from ..exceptions import FormatError
from .dataset import Dataset, Split

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
MAX_LABEL = 9

PathLike = Union[str, Path]


def _read_bytes(path: PathLike) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as handle:
            return handle.read()
    except (OSError, EOFError) as error:
        raise FormatError(f"unreadable: {error}", path) from None


def _write_bytes(path: PathLike, payload: bytes) -> None:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as handle:
        handle.write(payload)


def _parse(path: PathLike, raw: bytes, magic: int, ndims: int) -> np.ndarray:
    header_size = 4 * (1 + ndims)

    if len(raw) < header_size:
        raise FormatError(f"truncated header ({len(raw)} bytes)", path)

    header = np.frombuffer(raw, dtype=">u4", count=1 + ndims)
    if int(header[0]) != magic:
        raise FormatError(f"bad magic 0x{int(header[0]):08x}, wanted 0x{magic:08x}", path)

    shape = tuple(int(d) for d in header[1:])
    expected = int(np.prod(shape))
    available = len(raw) - header_size

    if available < expected:
        raise FormatError(f"truncated payload: {available} of {expected} bytes", path)

    if available > expected:
        logger.debug(f"{path}: ignoring {available - expected} trailing bytes")

    payload = np.frombuffer(raw, dtype=np.uint8, count=expected, offset=header_size)
    return payload.reshape(shape)


def read_idx_images(path: PathLike) -> np.ndarray:
    """Images as a float64 matrix, one flattened image per row, in [0, 1].

    Raises:
    - FormatError
    """
    images = _parse(path, _read_bytes(path), IMAGES_MAGIC, 3)
    logger.debug(f"{path}: {images.shape[0]} images {images.shape[1]}x{images.shape[2]}")
    return images.reshape(images.shape[0], -1).astype(np.float64) / 255.0


def read_idx_labels(path: PathLike) -> np.ndarray:
    """Class labels as an int64 vector.

    Raises:
    - FormatError
    """
    labels = _parse(path, _read_bytes(path), LABELS_MAGIC, 1)
    if labels.size and int(labels.max()) > MAX_LABEL:
        raise FormatError(f"label {int(labels.max())} outside 0..{MAX_LABEL}", path)
    return labels.astype(np.int64)


def load_idx(
    images_path: PathLike,
    labels_path: Optional[PathLike] = None,
    autoencoder: bool = False,
    split: Split = Split.train,
) -> Dataset:
    """Loads an image file and, optionally, its labels.

    Without labels, or with `autoencoder`, the targets are the inputs.

    :images_path: str or Path
    :labels_path: optional str or Path
    :autoencoder: bool
    :split: Split tag for the result
    :return: Dataset

    Raises:
    - FormatError
    """
    inputs = read_idx_images(images_path)

    if labels_path is None or autoencoder:
        return Dataset(inputs, inputs, split)

    labels = read_idx_labels(labels_path)

    if len(labels) != len(inputs):
        raise FormatError(
            f"{len(labels)} labels for {len(inputs)} images in {images_path}", labels_path
        )

    return Dataset(inputs, labels, split)


def save_idx_images(path: PathLike, inputs: np.ndarray, side: Optional[int] = None) -> None:
    """Writes row-stacked images with values in [0, 1] as ubyte IDX.

    Rows must be square images unless `side` names the row count of
    each image explicitly.

    Raises:
    - FormatError
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=np.float64))
    count, dim = inputs.shape
    rows = side if side is not None else int(round(np.sqrt(dim)))

    if rows < 1 or dim % rows:
        raise FormatError(f"can't lay {dim} pixels out as an image", path)

    pixels = np.clip(np.rint(inputs * 255.0), 0, 255).astype(np.uint8)
    header = np.array([IMAGES_MAGIC, count, rows, dim // rows], dtype=">u4")
    _write_bytes(path, header.tobytes() + pixels.tobytes())
    logger.debug(f"wrote {count} images to {path}")


def save_idx_labels(path: PathLike, labels: np.ndarray) -> None:
    """Writes class labels as ubyte IDX.

    Raises:
    - FormatError
    """
    labels = np.asarray(labels).reshape(-1)
    if labels.size and (labels.min() < 0 or labels.max() > MAX_LABEL):
        raise FormatError(f"labels must lie in 0..{MAX_LABEL}", path)

    header = np.array([LABELS_MAGIC, labels.size], dtype=">u4")
    _write_bytes(path, header.tobytes() + labels.astype(np.uint8).tobytes())
    logger.debug(f"wrote {labels.size} labels to {path}")

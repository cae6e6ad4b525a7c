"""Experiment Files

Line oriented `key = value` text. Blank lines and everything after a
`#` are ignored; keys may appear once. Relative paths are taken
relative to the file's directory.

    dataset = mnist
    model = 784-200-100-10
    loss = softmax_cross_entropy
    optimizer = ksd
    train_images = train-images-idx3-ubyte.gz
"""

from pathlib import Path
from typing import Dict, Tuple, Union

from loguru import logger
from pydantic import ValidationError

from ..exceptions import ConfigError, InvalidInput
from .models import REQUIRED_KEYS, ExperimentConfig

PATH_KEYS = (
    "train_images",
    "train_labels",
    "test_images",
    "test_labels",
    "output_csv",
    "summary_json",
)


def read_pairs(path: Union[str, Path]) -> Dict[str, Tuple[str, int]]:
    """Maps each key to its (raw value, line number).

    Raises:
    - ConfigError
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise ConfigError(f"unreadable: {error.strerror}", path) from None

    known = ExperimentConfig.keys()
    pairs: Dict[str, Tuple[str, int]] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.partition("#")[0].strip()
        if not line:
            continue

        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()

        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {line!r}", path, lineno)

        if key not in known:
            raise ConfigError(f"unknown key {key!r}", path, lineno, key)

        if key in pairs:
            first = pairs[key][1]
            raise ConfigError(
                f"duplicate key {key!r}, first set on line {first}", path, lineno, key
            )

        pairs[key] = (value, lineno)

    return pairs


def parse_config(path: Union[str, Path]) -> ExperimentConfig:
    """Reads and validates an experiment file.

    :path: str or Path
    :return: ExperimentConfig with defaults filled in

    Raises:
    - ConfigError
    """
    path = Path(path)
    pairs = read_pairs(path)
    logger.debug(f"{path}: {len(pairs)} keys")

    missing = [key for key in REQUIRED_KEYS if key not in pairs]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}", path)

    values = {key: value for key, (value, _) in pairs.items()}

    for key in PATH_KEYS:
        if values.get(key):
            values[key] = str(path.parent / Path(values[key]).expanduser())

    try:
        config = ExperimentConfig(**values)
    except ValidationError as error:
        problem = error.errors()[0]
        key = str(problem["loc"][0]) if problem.get("loc") else None
        lineno = pairs[key][1] if key in pairs else None
        raise ConfigError(f"{key}: {problem['msg']}", path, lineno, key) from None

    if config.loss.is_classification and not config.dataset.has_labels:
        raise ConfigError(
            f"{config.dataset.value} has no class labels for {config.loss.value}",
            path,
            pairs["loss"][1],
            "loss",
        )

    try:
        config.network_spec()
    except InvalidInput as error:
        raise ConfigError(str(error), path, pairs["model"][1], "model") from None

    return config

"""
"""

import pytest

from typing import Optional

from ksd.exceptions import (
    BaseFileException,
    ConfigError,
    DegenerateCurvature,
    FormatError,
    InvalidInput,
    InvalidPlan,
    InvalidStart,
    KsdError,
    NotPositiveDefinite,
    NumericalError,
    NumericalOverflow,
    ZeroGradient,
)


def check_basefileexception(
    error: BaseFileException,
    message: str,
    path: Optional[str],
    lineno: Optional[int],
) -> bool:

    return all(
        [
            error.message == message,
            error.path == path,
            error.lineno == lineno,
            isinstance(error.name, str),
            error.name in repr(error),
            message in str(error),
            hasattr(error, "args"),
        ]
    )


@pytest.mark.parametrize("exception_class", [ConfigError, FormatError])
@pytest.mark.parametrize(
    "path,lineno,expected",
    [
        ("run.conf", 4, "run.conf:4: bad value"),
        ("run.conf", None, "run.conf: bad value"),
        (None, None, "bad value"),
    ],
)
def test_exception_basefileexceptions(exception_class, path, lineno, expected) -> None:

    error = exception_class("bad value", path, lineno)

    assert check_basefileexception(error, "bad value", path, lineno)
    assert str(error) == expected

    with pytest.raises(KsdError):
        raise error


def test_exception_configerror_key() -> None:

    error = ConfigError("not a number", "a.conf", 2, key="max_iters")

    assert error.key == "max_iters"


def test_exception_formaterror_reason() -> None:

    error = FormatError("bad magic", "images-idx3-ubyte")

    assert error.reason == "bad magic"


def test_exception_notpositivedefinite() -> None:

    error = NotPositiveDefinite(3, -0.5)

    assert error.pivot == 3
    assert error.value == -0.5
    assert str(error) == "NotPositiveDefinite: pivot 3 is -0.5"


@pytest.mark.parametrize(
    "exception_class,parent",
    [
        (InvalidInput, ValueError),
        (InvalidPlan, InvalidInput),
        (ZeroGradient, KsdError),
        (NumericalError, KsdError),
        (NumericalOverflow, NumericalError),
        (NotPositiveDefinite, NumericalError),
        (DegenerateCurvature, NumericalError),
        (InvalidStart, NumericalError),
        (ConfigError, BaseFileException),
        (FormatError, BaseFileException),
    ],
)
def test_exception_hierarchy(exception_class, parent) -> None:

    assert issubclass(exception_class, parent)
    assert issubclass(exception_class, KsdError)

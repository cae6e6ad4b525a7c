"""KSD Exceptions
"""

from typing import Optional, Union

from pathlib import Path

from loguru import logger


class KsdError(Exception):
    """Base class for everything this package raises on purpose."""


class InvalidInput(KsdError, ValueError):
    """Shapes, values or batches that the numerical routines can't use."""


class InvalidPlan(InvalidInput):
    """The subset fractions can't be satisfied for this dataset."""


class ZeroGradient(KsdError):
    """The gradient vanished; the current parameters are stationary."""


class NumericalError(KsdError):
    """Something overflowed, went non-finite or lost definiteness."""


class NumericalOverflow(NumericalError):
    """A non-finite value appeared in a forward or curvature pass."""


class NotPositiveDefinite(NumericalError):
    """Cholesky met a non-positive pivot."""

    def __init__(self, pivot: int, value: float = float("nan")) -> None:
        """
        :pivot: int zero-based row of the failing pivot
        :value: float offending diagonal value, if known
        """
        super().__init__(pivot, value)
        self.pivot = pivot
        self.value = value
        self.name = self.__class__.__name__

    def __str__(self) -> str:
        return f"{self.name}: pivot {self.pivot} is {self.value!r}"


class DegenerateCurvature(NumericalError):
    """The reduced curvature matrix is identically zero."""


class InvalidStart(NumericalError):
    """The objective is not finite at the starting point."""


class BaseFileException(KsdError):
    """Errors that point at a place in a file."""

    def __init__(
        self,
        message: str,
        path: Union[str, Path, None] = None,
        lineno: Optional[int] = None,
    ) -> None:
        """
        :message: str
        :path: optional file the problem was found in
        :lineno: optional one-based line number
        """
        super().__init__(message, path, lineno)
        self.message = message
        self.path = str(path) if path is not None else None
        self.lineno = lineno
        self.name = self.__class__.__name__

    @property
    def location(self) -> str:
        if self.path is None:
            return ""
        if self.lineno is None:
            return f"{self.path}: "
        return f"{self.path}:{self.lineno}: "

    def __repr__(self) -> str:
        return f"{self.name}({self.message!r}, path={self.path!r}, lineno={self.lineno!r})"

    def __str__(self) -> str:
        return f"{self.location}{self.message}"


class ConfigError(BaseFileException):
    """An experiment file is missing keys or has values we can't use."""

    def __init__(
        self,
        message: str,
        path: Union[str, Path, None] = None,
        lineno: Optional[int] = None,
        key: Optional[str] = None,
    ) -> None:
        super().__init__(message, path, lineno)
        self.key = key
        logger.debug(f"{self!s} key={key}")


class FormatError(BaseFileException):
    """An IDX file is truncated or has unexpected header values."""

    @property
    def reason(self) -> str:
        return self.message

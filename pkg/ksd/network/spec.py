"""Network Specification

The model family is a plain feedforward perceptron: a list of layer
widths, one nonlinearity per non-input layer and a loss. Parameters
live in one flat float64 vector; ParameterLayout knows how to view it
as per-layer (W, b) pairs.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np
import scipy.special

from loguru import logger

from ..exceptions import InvalidInput

ParameterVector = np.ndarray

LOGISTIC_CLAMP = 500.0


class Nonlinearity(str, Enum):
    logistic = "logistic"
    linear = "linear"

    def apply(self, h: np.ndarray) -> np.ndarray:
        if self is Nonlinearity.linear:
            return h
        return scipy.special.expit(np.clip(h, -LOGISTIC_CLAMP, LOGISTIC_CLAMP))

    def derivative(self, v: np.ndarray) -> np.ndarray:
        """φ' expressed through the layer output v = φ(h)."""
        if self is Nonlinearity.linear:
            return np.ones_like(v)
        return v * (1.0 - v)

    def second_derivative(self, v: np.ndarray) -> np.ndarray:
        """φ'' expressed through the layer output v = φ(h)."""
        if self is Nonlinearity.linear:
            return np.zeros_like(v)
        return v * (1.0 - v) * (1.0 - 2.0 * v)


class LossKind(str, Enum):
    squared_error = "squared_error"
    softmax_cross_entropy = "softmax_cross_entropy"

    @property
    def is_classification(self) -> bool:
        return self is LossKind.softmax_cross_entropy

    def check_targets(self, targets: np.ndarray, num_samples: int, output_dim: int) -> None:
        """Raises InvalidInput unless `targets` suit this loss."""

        if self.is_classification:
            if targets.shape != (num_samples,):
                raise InvalidInput(
                    f"class targets need shape ({num_samples},), got {targets.shape}"
                )
            if not np.issubdtype(targets.dtype, np.integer):
                raise InvalidInput(f"class targets must be integers, got {targets.dtype}")
            if num_samples and (targets.min() < 0 or targets.max() >= output_dim):
                raise InvalidInput(
                    f"class index outside [0, {output_dim}): {targets.min()}..{targets.max()}"
                )
            return

        if targets.shape != (num_samples, output_dim):
            raise InvalidInput(
                f"vector targets need shape ({num_samples}, {output_dim}), got {targets.shape}"
            )

    def losses(self, outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Per-sample loss for a batch of network outputs."""
        if self.is_classification:
            rows = np.arange(outputs.shape[0])
            return scipy.special.logsumexp(outputs, axis=1) - outputs[rows, targets]
        residual = outputs - targets
        return np.sum(residual * residual, axis=1)

    def output_gradient(self, outputs: np.ndarray, targets: np.ndarray) -> np.ndarray:
        """Per-sample ∂E/∂v for a batch of network outputs."""
        if self.is_classification:
            gradient = scipy.special.softmax(outputs, axis=1)
            gradient[np.arange(outputs.shape[0]), targets] -= 1.0
            return gradient
        return 2.0 * (outputs - targets)

    def hessian_action(self, outputs: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Rowwise (∂²E/∂v²) u, never forming the matrix."""
        if self.is_classification:
            p = scipy.special.softmax(outputs, axis=1)
            return p * u - p * np.sum(p * u, axis=1, keepdims=True)
        return 2.0 * u


class ParameterLayout:
    """Maps a flat parameter vector onto per-layer (W, b) views.

    Layer l contributes W of shape dims[l] x dims[l-1] (row-major)
    followed by b of length dims[l].
    """

    def __init__(self, layer_dims: Sequence[int]) -> None:
        self.layer_dims = tuple(layer_dims)
        self.slices: List[Tuple[slice, Tuple[int, int], slice]] = []

        offset = 0
        for fan_in, fan_out in zip(self.layer_dims, self.layer_dims[1:]):
            w_end = offset + fan_in * fan_out
            b_end = w_end + fan_out
            self.slices.append(
                (slice(offset, w_end), (fan_out, fan_in), slice(w_end, b_end))
            )
            offset = b_end

        self.size = offset

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.layer_dims!r})"

    def __len__(self) -> int:
        return self.size

    def check(self, flat: np.ndarray) -> np.ndarray:
        """Returns `flat` as float64, raising InvalidInput on a size mismatch."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.size,):
            raise InvalidInput(f"expected {self.size} parameters, got shape {flat.shape}")
        return flat

    def unpack(self, flat: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
        """Per-layer (W, b) views into `flat`; writes go through."""
        flat = self.check(flat)
        return [
            (flat[w_slice].reshape(shape), flat[b_slice])
            for w_slice, shape, b_slice in self.slices
        ]

    def pack(self, layers: Sequence[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
        """Inverse of unpack: a fresh flat vector from per-layer arrays."""
        flat = np.empty(self.size, dtype=np.float64)
        for (w_slice, shape, b_slice), (w, b) in zip(self.slices, layers):
            flat[w_slice] = np.reshape(w, -1)
            flat[b_slice] = b
        return flat

    @cached_property
    def weight_mask(self) -> np.ndarray:
        """True for weight entries, False for biases."""
        mask = np.zeros(self.size, dtype=bool)
        for w_slice, _, _ in self.slices:
            mask[w_slice] = True
        return mask


@dataclass(frozen=True)
class NetworkSpec:
    """Layer widths (input first), one nonlinearity per non-input
    layer, and the loss.

    With softmax_cross_entropy the final layer must be linear; the
    softmax belongs to the loss.
    """

    layer_dims: Tuple[int, ...]
    nonlinearities: Tuple[Nonlinearity, ...]
    loss_kind: LossKind = LossKind.squared_error

    def __post_init__(self) -> None:
        object.__setattr__(self, "layer_dims", tuple(int(d) for d in self.layer_dims))
        object.__setattr__(
            self, "nonlinearities", tuple(Nonlinearity(n) for n in self.nonlinearities)
        )
        object.__setattr__(self, "loss_kind", LossKind(self.loss_kind))

        if len(self.layer_dims) < 2:
            raise InvalidInput(f"need at least input and output dims: {self.layer_dims}")

        if any(d < 1 for d in self.layer_dims):
            raise InvalidInput(f"layer dims must be positive: {self.layer_dims}")

        if len(self.nonlinearities) != len(self.layer_dims) - 1:
            raise InvalidInput(
                f"{len(self.nonlinearities)} nonlinearities for "
                f"{len(self.layer_dims) - 1} layers"
            )

        if (
            self.loss_kind.is_classification
            and self.nonlinearities[-1] is not Nonlinearity.linear
        ):
            raise InvalidInput("softmax_cross_entropy needs a linear output layer")

    @classmethod
    def from_string(
        cls,
        model: str,
        loss_kind: LossKind = LossKind.softmax_cross_entropy,
        mirror: bool = False,
    ) -> "NetworkSpec":
        """Parses a dash separated model string such as "784-500-10".

        Hidden layers are logistic. Classification nets get a linear
        output layer; squared-error nets get a logistic output and a
        linear coding layer (the narrowest hidden layer). With
        `mirror`, the string names only the encoder and the decoder
        is appended in reverse.

        Raises:
        - InvalidInput
        """
        logger.debug(f"model={model!r} loss={loss_kind} mirror={mirror}")

        try:
            dims = [int(field) for field in model.strip().split("-")]
        except ValueError:
            raise InvalidInput(f"unparsable model string {model!r}") from None

        if mirror:
            dims = dims + dims[-2::-1]

        loss_kind = LossKind(loss_kind)

        if len(dims) < 2 or any(d < 1 for d in dims):
            raise InvalidInput(f"unusable model string {model!r}")

        nonlinearities = [Nonlinearity.logistic] * (len(dims) - 1)

        if loss_kind.is_classification:
            nonlinearities[-1] = Nonlinearity.linear
        elif len(dims) > 2:
            hidden = dims[1:-1]
            coding = 1 + hidden.index(min(hidden))
            nonlinearities[coding - 1] = Nonlinearity.linear

        return cls(tuple(dims), tuple(nonlinearities), loss_kind)

    @classmethod
    def autoencoder(cls, encoder_dims: Sequence[int]) -> "NetworkSpec":
        """Symmetric squared-error autoencoder from the encoder widths."""
        model = "-".join(str(d) for d in encoder_dims)
        return cls.from_string(model, LossKind.squared_error, mirror=True)

    def __str__(self) -> str:
        return "-".join(str(d) for d in self.layer_dims)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    @property
    def num_layers(self) -> int:
        return len(self.layer_dims) - 1

    @cached_property
    def layout(self) -> ParameterLayout:
        return ParameterLayout(self.layer_dims)

    @property
    def num_params(self) -> int:
        return self.layout.size

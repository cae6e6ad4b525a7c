"""Multilayer Perceptron

Forward pass, loss, backprop gradient and the Fisher diagonal for the
networks described by NetworkSpec. All batch routines work on whole
row-stacked batches at once and normalize by the number of samples.

The L2 term (l2_coeff/2)·‖weights‖² never touches biases.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from loguru import logger

from ..exceptions import InvalidInput, NumericalOverflow
from .batch import Batch, Sample
from .spec import NetworkSpec, ParameterVector

Layers = List[Tuple[np.ndarray, np.ndarray]]


@dataclass
class Activations:
    """Pre-activations h[l] and outputs v[l] for l = 0..L.

    h[0] is unused and v[0] is the input. Arrays are row-stacked when
    the pass ran over a batch.
    """

    pre: List[np.ndarray]
    post: List[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.post[-1]

    def __len__(self) -> int:
        return len(self.post)


def init_params(spec: NetworkSpec, seed: int = 0, scale: float = 1.0) -> ParameterVector:
    """Random weights, zero biases.

    Layer l weights are uniform on ±scale/√dims[l-1]. The same
    (spec, seed, scale) always gives the same vector.

    :spec: NetworkSpec
    :seed: int
    :scale: float > 0
    :return: ParameterVector

    Raises:
    - InvalidInput
    """
    if not scale > 0:
        raise InvalidInput(f"scale must be positive, got {scale}")

    rng = np.random.default_rng(seed)
    params = np.zeros(spec.num_params, dtype=np.float64)

    for w, _ in spec.layout.unpack(params):
        fan_out, fan_in = w.shape
        w[:] = rng.uniform(-1.0, 1.0, size=w.shape) * (scale / np.sqrt(fan_in))

    logger.debug(f"{spec} {spec.num_params} params seed={seed} scale={scale}")
    return params


def _forward(spec: NetworkSpec, layers: Layers, inputs: np.ndarray) -> Activations:
    pre = [np.zeros_like(inputs)]
    post = [inputs]

    for (w, b), phi in zip(layers, spec.nonlinearities):
        h = post[-1] @ w.T + b
        v = phi.apply(h)
        if not np.all(np.isfinite(v)):
            raise NumericalOverflow(f"non-finite activation in layer {len(post)}")
        pre.append(h)
        post.append(v)

    return Activations(pre, post)


def forward(
    spec: NetworkSpec,
    params: ParameterVector,
    x: np.ndarray,
) -> Activations:
    """Runs the network on one input vector or a row-stacked batch.

    h[l] = W[l] v[l-1] + b[l], v[l] = φ[l](h[l]).

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    inputs = np.atleast_2d(x)

    if inputs.shape[1] != spec.input_dim:
        raise InvalidInput(f"input dim {inputs.shape[1]}, network wants {spec.input_dim}")

    acts = _forward(spec, spec.layout.unpack(params), inputs)

    if single:
        return Activations([a[0] for a in acts.pre], [a[0] for a in acts.post])
    return acts


def loss(spec: NetworkSpec, output: np.ndarray, target: Union[int, np.ndarray]) -> float:
    """Loss of one network output against its target.

    squared_error: ‖v - y‖²; softmax_cross_entropy: -v[y] + log Σ exp(v).

    Raises:
    - InvalidInput
    """
    batch = Batch.from_samples([Sample(np.zeros(1), target)])
    outputs = np.atleast_2d(np.asarray(output, dtype=np.float64))
    spec.loss_kind.check_targets(batch.targets, 1, outputs.shape[1])
    return float(spec.loss_kind.losses(outputs, batch.targets)[0])


def check_batch(spec: NetworkSpec, batch: Batch) -> None:
    """Raises InvalidInput unless `batch` is non-empty and fits `spec`."""
    if len(batch) == 0:
        raise InvalidInput("empty batch")

    if batch.inputs.shape[1] != spec.input_dim:
        raise InvalidInput(
            f"batch input dim {batch.inputs.shape[1]}, network wants {spec.input_dim}"
        )

    spec.loss_kind.check_targets(batch.targets, len(batch), spec.output_dim)


def _regularized_mean(
    spec: NetworkSpec,
    params: ParameterVector,
    acts: Activations,
    batch: Batch,
    l2_coeff: float,
) -> float:
    value = float(np.mean(spec.loss_kind.losses(acts.output, batch.targets)))
    if l2_coeff:
        weights = params[spec.layout.weight_mask]
        value += 0.5 * l2_coeff * float(weights @ weights)
    return value


def _backward(
    spec: NetworkSpec,
    layers: Layers,
    acts: Activations,
    output_gradient: np.ndarray,
) -> List[np.ndarray]:
    """Per-sample ∂E/∂h[l] for l = 1..L (index 0 is h[1])."""
    deltas: List[np.ndarray] = []
    dv = output_gradient

    for l in range(spec.num_layers, 0, -1):
        phi = spec.nonlinearities[l - 1]
        delta = dv * phi.derivative(acts.post[l])
        deltas.append(delta)
        if l > 1:
            dv = delta @ layers[l - 1][0]

    deltas.reverse()
    return deltas


def objective(
    spec: NetworkSpec,
    params: ParameterVector,
    batch: Batch,
    l2_coeff: float = 0.0,
) -> float:
    """Mean loss over `batch` plus (l2_coeff/2)·‖weights‖².

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    check_batch(spec, batch)
    params = spec.layout.check(params)
    acts = _forward(spec, spec.layout.unpack(params), batch.inputs)
    return _regularized_mean(spec, params, acts, batch, l2_coeff)


def objective_and_gradient(
    spec: NetworkSpec,
    params: ParameterVector,
    batch: Batch,
    l2_coeff: float = 0.0,
) -> Tuple[float, ParameterVector]:
    """Regularized objective and its gradient by backprop.

    The value is computed exactly as `objective` computes it.

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    check_batch(spec, batch)
    params = spec.layout.check(params)
    layers = spec.layout.unpack(params)
    acts = _forward(spec, layers, batch.inputs)
    value = _regularized_mean(spec, params, acts, batch, l2_coeff)

    deltas = _backward(
        spec, layers, acts, spec.loss_kind.output_gradient(acts.output, batch.targets)
    )

    n = len(batch)
    grads = [
        (delta.T @ acts.post[l] / n, delta.sum(axis=0) / n)
        for l, delta in enumerate(deltas)
    ]
    grad = spec.layout.pack(grads)

    if l2_coeff:
        grad[spec.layout.weight_mask] += l2_coeff * params[spec.layout.weight_mask]

    return value, grad


def gradient(
    spec: NetworkSpec,
    params: ParameterVector,
    batch: Batch,
    l2_coeff: float = 0.0,
) -> ParameterVector:
    """∇θ of `objective`.

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    return objective_and_gradient(spec, params, batch, l2_coeff)[1]


def fisher_diagonal(
    spec: NetworkSpec,
    params: ParameterVector,
    batch: Batch,
) -> ParameterVector:
    """Mean of the squared per-sample loss gradients, no L2 term.

    For a weight W[l][i, j] the per-sample gradient is δ[l]_i v[l-1]_j,
    so its square averages to (δ²)ᵀ(v²)/n without ever materializing
    per-sample gradients.

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    check_batch(spec, batch)
    layers = spec.layout.unpack(params)
    acts = _forward(spec, layers, batch.inputs)
    deltas = _backward(
        spec, layers, acts, spec.loss_kind.output_gradient(acts.output, batch.targets)
    )

    n = len(batch)
    squares = [
        ((delta * delta).T @ (acts.post[l] * acts.post[l]) / n, (delta * delta).sum(axis=0) / n)
        for l, delta in enumerate(deltas)
    ]
    return spec.layout.pack(squares)


def classification_error(
    spec: NetworkSpec,
    params: ParameterVector,
    batch: Batch,
) -> float:
    """Percentage of samples whose largest output is not the target class.

    Raises:
    - InvalidInput
    """
    if not spec.loss_kind.is_classification:
        raise InvalidInput("classification error needs class targets")

    check_batch(spec, batch)
    acts = _forward(spec, spec.layout.unpack(params), batch.inputs)
    wrong = np.argmax(acts.output, axis=1) != batch.targets
    return 100.0 * float(np.mean(wrong))

"""Curvature Products

Matrix-free products with the Gauss-Newton matrix G = JᵀH_E J and with
the exact Hessian of the loss, both averaged over a batch.

The Gauss-Newton product is a forward pass of directional derivatives
(the "1" quantities: h1, v1) followed by the loss-Hessian action at the
output and an ordinary backward pass. The Hessian product is the
R-operator: directional differentiation applied to every line of the
forward and backward passes, which brings in φ''.

Biases take part like weights: a direction's b1 adds to h1 and the
backward pass yields b̂ = Σ ĥ.
"""

from enum import Enum
from typing import List, Tuple

import numpy as np

from loguru import logger

from .exceptions import InvalidInput, NumericalOverflow
from .network import Batch, NetworkSpec, ParameterVector, Sample
from .network.mlp import Activations, Layers, _forward, check_batch
from .network.spec import LossKind


class CurvatureKind(str, Enum):
    gauss_newton = "gauss_newton"
    hessian = "hessian"

    @property
    def is_psd(self) -> bool:
        """The curvature is positive semidefinite by construction."""
        return self is CurvatureKind.gauss_newton


def loss_hessian_action(
    loss_kind: LossKind,
    output: np.ndarray,
    target: object,
    u: np.ndarray,
) -> np.ndarray:
    """(∂²E/∂v²) u at the network output `output`.

    squared_error gives 2u. softmax_cross_entropy gives
    (diag(p) - ppᵀ)u = p⊙u - p(pᵀu) with p = softmax(output); the
    target does not enter either expression.
    """
    output = np.asarray(output, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)

    if output.shape != u.shape:
        raise InvalidInput(f"output {output.shape} and u {u.shape} differ")

    single = output.ndim == 1
    result = LossKind(loss_kind).hessian_action(np.atleast_2d(output), np.atleast_2d(u))
    return result[0] if single else result


def _check_finite(values: np.ndarray, where: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NumericalOverflow(f"non-finite values in {where}")
    return values


def _gauss_newton(
    spec: NetworkSpec,
    layers: Layers,
    acts: Activations,
    direction: Layers,
) -> Layers:
    """Summed (not averaged) per-layer pieces of Gθ₁ over the batch."""
    v1 = np.zeros_like(acts.post[0])

    for l, ((w, _), (w1, b1)) in enumerate(zip(layers, direction), start=1):
        h1 = v1 @ w.T + acts.post[l - 1] @ w1.T + b1
        v1 = spec.nonlinearities[l - 1].derivative(acts.post[l]) * h1

    v_hat = _check_finite(
        spec.loss_kind.hessian_action(acts.output, v1), "loss Hessian action"
    )

    products: Layers = []
    for l in range(spec.num_layers, 0, -1):
        h_hat = v_hat * spec.nonlinearities[l - 1].derivative(acts.post[l])
        products.append((h_hat.T @ acts.post[l - 1], h_hat.sum(axis=0)))
        if l > 1:
            v_hat = h_hat @ layers[l - 1][0]

    products.reverse()
    return products


def _hessian(
    spec: NetworkSpec,
    layers: Layers,
    acts: Activations,
    targets: np.ndarray,
    direction: Layers,
) -> Layers:
    """Summed per-layer pieces of Hθ₁ via the R-operator."""
    r_pre: List[np.ndarray] = [np.zeros_like(acts.post[0])]
    r_post: List[np.ndarray] = [np.zeros_like(acts.post[0])]

    for l, ((w, _), (w1, b1)) in enumerate(zip(layers, direction), start=1):
        r_h = r_post[-1] @ w.T + acts.post[l - 1] @ w1.T + b1
        r_pre.append(r_h)
        r_post.append(spec.nonlinearities[l - 1].derivative(acts.post[l]) * r_h)

    dv = spec.loss_kind.output_gradient(acts.output, targets)
    r_dv = _check_finite(
        spec.loss_kind.hessian_action(acts.output, r_post[-1]), "loss Hessian action"
    )

    products: Layers = []
    for l in range(spec.num_layers, 0, -1):
        phi = spec.nonlinearities[l - 1]
        w, _ = layers[l - 1]
        w1, _ = direction[l - 1]

        delta = dv * phi.derivative(acts.post[l])
        r_delta = r_dv * phi.derivative(acts.post[l]) + dv * phi.second_derivative(
            acts.post[l]
        ) * r_pre[l]

        products.append(
            (
                r_delta.T @ acts.post[l - 1] + delta.T @ r_post[l - 1],
                r_delta.sum(axis=0),
            )
        )

        if l > 1:
            dv, r_dv = delta @ w, r_delta @ w + delta @ w1

    products.reverse()
    return products


def _product(
    spec: NetworkSpec,
    layers: Layers,
    acts: Activations,
    batch: Batch,
    direction: ParameterVector,
    kind: CurvatureKind,
    l2_coeff: float,
) -> ParameterVector:
    direction = spec.layout.check(direction)
    pieces = spec.layout.unpack(direction)

    if kind is CurvatureKind.gauss_newton:
        summed = _gauss_newton(spec, layers, acts, pieces)
    else:
        summed = _hessian(spec, layers, acts, batch.targets, pieces)

    result = spec.layout.pack(summed) / len(batch)

    if l2_coeff:
        mask = spec.layout.weight_mask
        result[mask] += l2_coeff * direction[mask]

    return _check_finite(result, f"{kind.value} product")


def batch_curvature_product(
    spec: NetworkSpec,
    params: ParameterVector,
    direction: ParameterVector,
    batch: Batch,
    kind: CurvatureKind = CurvatureKind.gauss_newton,
    l2_coeff: float = 0.0,
) -> ParameterVector:
    """(1/|batch|) Σ B_i·direction + l2_coeff·direction_weights.

    :kind: CurvatureKind selects B = G (Gauss-Newton) or H (Hessian)

    Raises:
    - InvalidInput
    - NumericalOverflow
    """
    return CurvatureOperator(spec, params, batch, kind, l2_coeff)(direction)


def multiply_G(
    spec: NetworkSpec,
    params: ParameterVector,
    direction: ParameterVector,
    sample: Sample,
) -> ParameterVector:
    """Gauss-Newton product for a single sample."""
    batch = Batch.from_samples([sample])
    return batch_curvature_product(
        spec, params, direction, batch, CurvatureKind.gauss_newton
    )


def multiply_H(
    spec: NetworkSpec,
    params: ParameterVector,
    direction: ParameterVector,
    sample: Sample,
) -> ParameterVector:
    """Exact Hessian product for a single sample."""
    batch = Batch.from_samples([sample])
    return batch_curvature_product(spec, params, direction, batch, CurvatureKind.hessian)


class CurvatureOperator:
    """The batch curvature B at fixed parameters, as a callable v ↦ Bv.

    The forward pass is computed once on first use and reused by every
    product; `calls` counts products taken.
    """

    def __init__(
        self,
        spec: NetworkSpec,
        params: ParameterVector,
        batch: Batch,
        kind: CurvatureKind = CurvatureKind.gauss_newton,
        l2_coeff: float = 0.0,
    ) -> None:
        """
        Raises:
        - InvalidInput
        """
        check_batch(spec, batch)
        self.spec = spec
        self.params = spec.layout.check(params)
        self.batch = batch
        self.kind = CurvatureKind(kind)
        self.l2_coeff = float(l2_coeff)
        self.calls = 0

    def __repr__(self) -> str:
        return "".join(
            [
                f"{self.__class__.__name__}(",
                f"spec={self.spec!s}, ",
                f"batch={len(self.batch)}, ",
                f"kind={self.kind.value}, ",
                f"l2_coeff={self.l2_coeff})",
            ]
        )

    @property
    def dim(self) -> int:
        return self.spec.num_params

    @property
    def layers(self) -> Layers:
        try:
            return self._layers
        except AttributeError:
            pass
        self._layers = self.spec.layout.unpack(self.params)
        return self._layers

    @property
    def activations(self) -> Activations:
        try:
            return self._activations
        except AttributeError:
            pass
        self._activations = _forward(self.spec, self.layers, self.batch.inputs)
        return self._activations

    def __call__(self, direction: ParameterVector) -> ParameterVector:
        self.calls += 1
        return _product(
            self.spec,
            self.layers,
            self.activations,
            self.batch,
            direction,
            self.kind,
            self.l2_coeff,
        )

    def quadratic_form(self, direction: ParameterVector) -> float:
        """directionᵀ B direction."""
        return float(direction @ self(direction))

    def explicit(self) -> np.ndarray:
        """Assembles B column by column; only sensible for tiny nets."""
        logger.debug(f"assembling {self.dim}x{self.dim} {self.kind.value} matrix")
        columns = []
        for j in range(self.dim):
            e = np.zeros(self.dim)
            e[j] = 1.0
            columns.append(self(e))
        return np.column_stack(columns)

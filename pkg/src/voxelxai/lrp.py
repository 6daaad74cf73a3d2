"""Layer-wise relevance propagation with the epsilon rule.

Every layer kind goes through the same four-step procedure: stabilized
forward value z, ratio s = R/z, the layer VJP of s, then elementwise
multiplication by the input activation. With epsilon = 0 and no biases the
total relevance is conserved from the output score down to the voxels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import layers as L
from .errors import DomainError
from .explain import Heatmap
from .network import NetworkSpec, forward_traced, output_vector

_FLOOR = 1e-12


@dataclass
class LrpConfig:
    epsilon: float = 1e-6
    epsilon_signing: str = "signed"  # scale eps by sign(z), or add it unsigned
    output_init: str = "activation_value"  # start from f_target, or from 1.0
    bias_policy: str = "biases_absorb"  # biases_zeroed drops biases from z

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if self.epsilon_signing not in ("signed", "unsigned"):
            raise DomainError(f"unknown epsilon_signing {self.epsilon_signing!r}")
        if self.output_init not in ("activation_value", "unit"):
            raise DomainError(f"unknown output_init {self.output_init!r}")
        if self.bias_policy not in ("biases_absorb", "biases_zeroed"):
            raise DomainError(f"unknown bias_policy {self.bias_policy!r}")


@dataclass
class RelevanceStack:
    """Relevance at every layer boundary: relevances[i] sits at the input of
    layer i, relevances[-1] is the output-layer initialization."""

    layer_names: list[str]
    relevances: list[np.ndarray]

    @property
    def input_relevance(self) -> np.ndarray:
        return self.relevances[0]

    def total(self, boundary: int) -> float:
        return float(self.relevances[boundary].sum())


def _sign(z: np.ndarray) -> np.ndarray:
    # sign with sign(0) = +1
    return np.where(z >= 0.0, 1.0, -1.0)


def _stabilized(z: np.ndarray, cfg: LrpConfig) -> np.ndarray:
    if cfg.epsilon > 0.0:
        if cfg.epsilon_signing == "signed":
            z = z + cfg.epsilon * _sign(z)
        else:
            z = z + cfg.epsilon
    small = np.abs(z) < _FLOOR
    if small.any():
        z = np.where(small, _FLOOR * _sign(z), z)
    return z


def lrp_step(
    layer: L.LayerSpec,
    a: np.ndarray,
    r_next: np.ndarray,
    cfg: LrpConfig | None = None,
    weights: L.LayerWeights | None = None,
) -> np.ndarray:
    """Redistribute relevance across one layer: z, s = R/z, c = vjp(s),
    R_prev = a * c."""
    cfg = cfg or LrpConfig()
    a = np.asarray(a, dtype=np.float64)
    z_weights = weights
    if weights is not None and cfg.bias_policy == "biases_zeroed":
        z_weights = L.LayerWeights(weights.weight, np.zeros_like(weights.bias))
    z = _stabilized(L.layer_forward(layer, a, z_weights), cfg)
    s = np.asarray(r_next, dtype=np.float64) / z
    c = L.layer_vjp(layer, a, s, weights)
    return a * c


def relevance_stack(
    net: NetworkSpec, x, target: int, cfg: LrpConfig | None = None
) -> RelevanceStack:
    """Propagate relevance from output[target] down to the input, recording
    the relevance tensor at every layer boundary."""
    cfg = cfg or LrpConfig()
    out, trace = forward_traced(net, x)
    vec = output_vector(out)
    target = int(target)
    if not 0 <= target < vec.size:
        raise IndexError(f"target {target} out of range for output width {vec.size}")
    r = np.zeros_like(vec)
    r[target] = vec[target] if cfg.output_init == "activation_value" else 1.0

    relevances = [r]
    for i in range(len(net.layers) - 1, -1, -1):
        ly = net.layers[i]
        r = lrp_step(ly, trace.inputs[i], r, cfg, net.weights.get(ly.name))
        relevances.append(r)
    relevances.reverse()
    return RelevanceStack([ly.name for ly in net.layers], relevances)


def lrp(net: NetworkSpec, x, target: int, cfg: LrpConfig | None = None) -> Heatmap:
    """Input-voxel relevance for output[target] via the epsilon rule."""
    stack = relevance_stack(net, x, target, cfg)
    values = stack.input_relevance
    if values.ndim == 4 and values.shape[0] == 1:
        values = values[0]
    return Heatmap(values, "lrp", int(target))

"""Sensitivity analysis: squared-gradient relevance maps, plus the
iterative gradient-ascent input modification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .explain import Heatmap
from .network import NetworkSpec, input_gradient


@dataclass
class SensitivityConfig:
    output_form: str = "squared"  # squared relevance, or raw signed gradient
    dream_step: float = 0.01
    dream_iters: int = 10
    post_clamp: bool = False  # clamp the dreamed grid to [0,1] for display

    def __post_init__(self):
        if self.output_form not in ("squared", "signed"):
            raise DomainError(f"output_form must be 'squared' or 'signed', got {self.output_form!r}")
        if self.dream_iters > 0 and not (np.isfinite(self.dream_step) and self.dream_step > 0):
            raise DomainError("dream_step must be finite and positive")


def sensitivity_map(
    net: NetworkSpec, x, target: int, cfg: SensitivityConfig | None = None
) -> Heatmap:
    """Relevance of each input voxel to output[target].

    Squared form returns the elementwise square of the input gradient, so
    the map sums to the squared gradient norm; signed form returns the raw
    gradient (sign shows direction of influence)."""
    cfg = cfg or SensitivityConfig()
    grad = input_gradient(net, x, target)[0]
    values = grad * grad if cfg.output_form == "squared" else grad
    return Heatmap(values, "sa", target)


def deep_dream(net: NetworkSpec, x, target: int, cfg: SensitivityConfig | None = None):
    """Gradient ascent on output[target]: x <- x + step * grad, recomputing
    the gradient each iteration. Returns the modified grid with the caller's
    shape. No clamping unless post_clamp is set (then clamped once at the
    end, for display)."""
    cfg = cfg or SensitivityConfig()
    if cfg.dream_iters < 1:
        raise DomainError("dream_iters must be at least 1")
    x = np.asarray(x, dtype=np.float64)
    channelless = x.ndim == 3
    cur = x.copy()
    for _ in range(cfg.dream_iters):
        grad = input_gradient(net, cur, target)
        if channelless:
            grad = grad[0]
        cur = cur + cfg.dream_step * grad
    if cfg.post_clamp:
        cur = np.clip(cur, 0.0, 1.0)
    return cur

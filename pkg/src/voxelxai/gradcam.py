"""Grad-CAM over 3D feature maps: gradient-averaged channel weights, a
rectified weighted sum at the conv layer's resolution, and an upsampled
heatmap at input resolution. One forward and one backward pass per call."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UsageError
from .explain import Heatmap, grid_values
from .network import NetworkSpec, backward_chain, forward_traced, last_conv_layer, output_vector
from .numerics import nearest_resample, normalize01, trilinear_resample


@dataclass
class GradCamConfig:
    layer: Optional[str] = None  # None = last convolutional layer
    upsample: str = "trilinear"

    def __post_init__(self):
        if self.upsample not in ("trilinear", "nearest"):
            raise UsageError(f"upsample must be 'trilinear' or 'nearest', got {self.upsample!r}")


@dataclass
class GradCamResult:
    alpha: np.ndarray
    coarse_map: np.ndarray
    upsampled_map: Heatmap
    layer_name: str


def gradcam(
    net: NetworkSpec, x, target: int, cfg: GradCamConfig | None = None
) -> GradCamResult:
    """Weight each feature map of the chosen conv layer by its spatially
    averaged gradient, sum, rectify, and upsample to input dims."""
    cfg = cfg or GradCamConfig()
    if cfg.layer is None:
        layer = last_conv_layer(net)
    else:
        layer = net.layer(cfg.layer)
        if layer.kind != "conv3d":
            raise UsageError(f"layer {cfg.layer!r} is {layer.kind}, need conv3d")
    idx = net.layer_index(layer.name)

    out, trace = forward_traced(net, x)
    vec = output_vector(out)
    target = int(target)
    if not 0 <= target < vec.size:
        raise IndexError(f"target {target} out of range for output width {vec.size}")
    seed = np.zeros_like(vec)
    seed[target] = 1.0
    grad = backward_chain(net, trace, seed, down_to=idx + 1)

    feature_maps = trace.outputs[idx]
    alpha = grad.mean(axis=(1, 2, 3))
    coarse = np.maximum(np.tensordot(alpha, feature_maps, axes=(0, 0)), 0.0)

    resample = trilinear_resample if cfg.upsample == "trilinear" else nearest_resample
    upsampled = resample(coarse, net.input_dims[1:])
    return GradCamResult(alpha, coarse, Heatmap(upsampled, "gradcam", target), layer.name)


def superimpose(result: GradCamResult, x) -> Heatmap:
    """Multiply the normalized input by the normalized heatmap, so relevance
    shows only on occupied geometry."""
    values = grid_values(x)
    if values.shape != result.upsampled_map.dims:
        raise UsageError(
            f"input dims {values.shape} do not match heatmap {result.upsampled_map.dims}"
        )
    blended = normalize01(values) * normalize01(result.upsampled_map.values)
    return Heatmap(blended, "gradcam", result.upsampled_map.target)

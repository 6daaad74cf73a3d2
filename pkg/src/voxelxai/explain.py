"""Shared explanation contract: heatmap type, target selection, and the
method dispatch facade."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ShapeError, UsageError
from .network import NetworkSpec, forward, output_vector
from .numerics import argmax as first_argmax
from .voxelize import VoxelGrid


@dataclass
class Heatmap:
    """Signed per-voxel relevance over the explained input's spatial dims."""

    values: np.ndarray
    method: str
    target: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ShapeError(f"heatmap must be 3-D, got {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise DomainError("heatmap values must be finite")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape


@dataclass
class TargetSelection:
    """Which output neuron to explain: the largest activation, or a fixed
    index."""

    mode: str = "argmax"
    index: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("argmax", "index"):
            raise UsageError(f"selection mode must be 'argmax' or 'index', got {self.mode!r}")
        if self.mode == "index" and self.index is None:
            raise UsageError("explicit selection needs an index")


def select_target(output: np.ndarray, sel: TargetSelection) -> int:
    """Resolve a TargetSelection against a concrete output vector."""
    output = output_vector(np.asarray(output, dtype=np.float64))
    if output.size == 0:
        raise UsageError("cannot select a target from an empty output")
    if sel.mode == "argmax":
        return first_argmax(output)
    index = int(sel.index)
    if not 0 <= index < output.size:
        raise IndexError(f"target {index} out of range for output width {output.size}")
    return index


def grid_values(grid) -> np.ndarray:
    """Accept a VoxelGrid or plain array; return spatial values (nx, ny, nz)."""
    values = grid.values if isinstance(grid, VoxelGrid) else np.asarray(grid, dtype=np.float64)
    if values.ndim == 4 and values.shape[0] == 1:
        values = values[0]
    if values.ndim != 3:
        raise ShapeError(f"expected a 3-D grid, got shape {values.shape}")
    return values


def explain(net: NetworkSpec, grid, method: str, sel: TargetSelection, config=None) -> Heatmap:
    """Run one of the four methods; identical to calling the method module
    directly with the same config and seed."""
    from .gradcam import GradCamConfig, gradcam
    from .lime import LimeConfig, lime_explain
    from .lrp import LrpConfig, lrp
    from .sensitivity import SensitivityConfig, sensitivity_map

    table = {
        "sa": (SensitivityConfig, None),
        "lrp": (LrpConfig, None),
        "gradcam": (GradCamConfig, None),
        "lime": (LimeConfig, None),
    }
    if method not in table:
        raise UsageError(f"unknown method {method!r}; expected sa, lrp, gradcam or lime")
    cfg_type = table[method][0]
    if config is not None and not isinstance(config, cfg_type):
        raise UsageError(
            f"method {method!r} takes {cfg_type.__name__}, got {type(config).__name__}"
        )
    x = grid_values(grid)
    target = select_target(forward(net, x), sel)
    if method == "sa":
        return sensitivity_map(net, x, target, config)
    if method == "lrp":
        return lrp(net, x, target, config)
    if method == "gradcam":
        return gradcam(net, x, target, config).upsampled_map
    return lime_explain(net, x, target, config).heatmap

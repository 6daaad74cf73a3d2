"""LIME over voxel grids: uniform super-voxel segments, random keep/drop
masks, cosine-kernel sample weights, a weighted ridge surrogate, and a
top-K coefficient heatmap."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, NumericalError, ShapeError, UsageError
from .explain import Heatmap, grid_values
from .network import NetworkSpec, forward, output_vector
from .numerics import cosine_distance


@dataclass
class SegmentGrid:
    """Dense segment-id map partitioning a voxel grid, ids 0..S-1."""

    ids: np.ndarray
    segments_per_axis: int

    @property
    def count(self) -> int:
        return self.segments_per_axis**3


@dataclass
class PerturbationSample:
    mask: np.ndarray
    prediction: np.ndarray
    weight: float


@dataclass
class LimeConfig:
    segments_per_axis: int = 4
    n_samples: int = 256
    sigma: float = 0.25
    top_k: Optional[int] = None  # None resolves to min(10, segment count)
    ridge_lambda: float = 1e-3
    seed: int = 0
    replacement: float = 0.0


@dataclass
class LimeResult:
    coefficients: np.ndarray
    intercept: float
    heatmap: Heatmap
    segments: SegmentGrid


def segment_uniform_grid(dims, segments_per_axis: int) -> SegmentGrid:
    """Split each axis into segments_per_axis contiguous runs whose lengths
    differ by at most one (the longer runs sit at the end of the axis)."""
    s = int(segments_per_axis)
    if s < 1 or s > min(dims):
        raise DomainError(f"segments_per_axis {s} must lie in [1, min{tuple(dims)}]")
    axis_ids = []
    for n in dims:
        base, rem = divmod(n, s)
        lengths = [base] * (s - rem) + [base + 1] * rem
        axis_ids.append(np.repeat(np.arange(s), lengths))
    ix, iy, iz = axis_ids
    ids = ix[:, None, None] * s * s + iy[None, :, None] * s + iz[None, None, :]
    return SegmentGrid(ids, s)


def perturb(x: np.ndarray, seg: SegmentGrid, mask, replacement: float = 0.0) -> np.ndarray:
    """Copy of x with every dropped segment (mask 0) set to the replacement
    value."""
    mask = np.asarray(mask)
    if mask.shape != (seg.count,):
        raise ShapeError(f"mask length {mask.shape} does not match {seg.count} segments")
    return np.where(mask[seg.ids].astype(bool), x, replacement)


def proximity_weight(pred_x, pred_z, sigma: float) -> float:
    """exp(-D^2 / sigma^2) with D the cosine distance of the prediction
    vectors; identical predictions weigh exactly 1."""
    if not sigma > 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    d = cosine_distance(pred_x, pred_z)
    return float(np.exp(-(d * d) / (sigma * sigma)))


def weighted_ridge_fit(masks, y, w, lam: float) -> tuple[np.ndarray, float]:
    """Minimize sum_i w_i (y_i - b0 - masks_i . b)^2 + lam |b|^2 by normal
    equations; the intercept b0 is not penalized."""
    masks = np.asarray(masks, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n, s = masks.shape
    if n < s + 1:
        raise DomainError(f"{n} samples cannot determine {s} coefficients plus intercept")
    if lam < 0:
        raise DomainError("ridge penalty must be >= 0")
    design = np.hstack([np.ones((n, 1)), masks])
    normal = (design * w[:, None]).T @ design
    normal += lam * np.diag([0.0] + [1.0] * s)
    rhs = design.T @ (w * y)
    try:
        beta = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"normal matrix is singular ({exc}); raise ridge_lambda or n_samples"
        ) from exc
    if not np.isfinite(beta).all():
        raise NumericalError("ridge solution is not finite; raise ridge_lambda or n_samples")
    return beta[1:], float(beta[0])


def _resolve_config(cfg: LimeConfig) -> tuple[int, int]:
    s_total = cfg.segments_per_axis**3
    top_k = cfg.top_k if cfg.top_k is not None else min(10, s_total)
    if cfg.segments_per_axis < 1:
        raise UsageError("segments_per_axis must be >= 1")
    if cfg.n_samples < s_total + 1:
        raise UsageError(
            f"n_samples {cfg.n_samples} cannot determine {s_total} segments plus intercept"
        )
    if not 1 <= top_k <= s_total:
        raise UsageError(f"top_k {top_k} must lie in [1, {s_total}]")
    if not cfg.sigma > 0:
        raise UsageError("sigma must be positive")
    if cfg.ridge_lambda < 0:
        raise UsageError("ridge_lambda must be >= 0")
    return s_total, top_k


def lime_explain(
    net: NetworkSpec, x, target: int, cfg: LimeConfig | None = None
) -> LimeResult:
    """Fit a local affine surrogate over segment keep/drop masks and paint
    the top-K coefficients back over their segments."""
    cfg = cfg or LimeConfig()
    s_total, top_k = _resolve_config(cfg)
    values = grid_values(x)
    seg = segment_uniform_grid(values.shape, cfg.segments_per_axis)

    rng = np.random.default_rng(cfg.seed)
    masks = np.ones((cfg.n_samples, s_total), dtype=np.int64)
    masks[1:] = rng.integers(0, 2, size=(cfg.n_samples - 1, s_total))

    base = forward(net, perturb(values, seg, masks[0], cfg.replacement))
    base = output_vector(base)
    target = int(target)
    if not 0 <= target < base.size:
        raise IndexError(f"target {target} out of range for output width {base.size}")

    samples = [PerturbationSample(masks[0], base, 1.0)]
    for mask in masks[1:]:
        pred = output_vector(forward(net, perturb(values, seg, mask, cfg.replacement)))
        samples.append(PerturbationSample(mask, pred, proximity_weight(base, pred, cfg.sigma)))

    y = np.array([s.prediction[target] for s in samples])
    w = np.array([s.weight for s in samples])
    coef, intercept = weighted_ridge_fit(masks, y, w, cfg.ridge_lambda)

    keep = np.argsort(-np.abs(coef), kind="stable")[:top_k]
    painted = np.zeros(s_total)
    painted[keep] = coef[keep]
    heatmap = Heatmap(painted[seg.ids], "lime", target)
    return LimeResult(coef, intercept, heatmap, seg)

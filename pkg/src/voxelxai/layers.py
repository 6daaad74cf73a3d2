"""Layer definitions plus their forward maps, input VJPs and parameter grads.

Spatial activations are shaped (channels, nx, ny, nz); dense activations are
1-D vectors. Everything runs in float64.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError
from .numerics import as_f64


@dataclass(frozen=True)
class Conv3d:
    name: str
    in_channels: int
    out_channels: int
    kernel: tuple[int, int, int]
    stride: int = 1
    padding: str = "same"  # "same" keeps spatial dims at stride 1, "valid" shrinks by kernel-1

    kind = "conv3d"


@dataclass(frozen=True)
class MaxPool3d:
    name: str
    window: tuple[int, int, int]

    kind = "maxpool3d"


@dataclass(frozen=True)
class GlobalAvgPool:
    name: str

    kind = "global_avg_pool"


@dataclass(frozen=True)
class Dense:
    name: str
    in_features: int
    out_features: int

    kind = "dense"


@dataclass(frozen=True)
class Relu:
    name: str

    kind = "relu"


@dataclass(frozen=True)
class Flatten:
    name: str

    kind = "flatten"


@dataclass(frozen=True)
class Upsample3d:
    """Nearest-neighbor upsampling; in-memory only (used by the autoencoder
    decoder, never serialized)."""

    name: str
    factor: int = 2

    kind = "upsample3d"


LayerSpec = Union[Conv3d, MaxPool3d, GlobalAvgPool, Dense, Relu, Flatten, Upsample3d]


@dataclass
class LayerWeights:
    weight: np.ndarray
    bias: np.ndarray


def has_params(layer: LayerSpec) -> bool:
    return layer.kind in ("conv3d", "dense")


def _conv_pads(layer: Conv3d, spatial: tuple[int, ...]) -> list[tuple[int, int]]:
    s = layer.stride
    pads = []
    for n, k in zip(spatial, layer.kernel):
        if layer.padding == "same":
            out = -(-n // s)  # ceil
            total = max((out - 1) * s + k - n, 0)
            pads.append((total // 2, total - total // 2))
        else:
            pads.append((0, 0))
    return pads


def output_shape(layer: LayerSpec, in_shape: tuple[int, ...]) -> tuple[int, ...]:
    """Declared output dims of `layer` for an input of dims `in_shape`."""
    kind = layer.kind
    if kind == "conv3d":
        if len(in_shape) != 4 or in_shape[0] != layer.in_channels:
            raise ShapeError(
                f"layer {layer.name!r} expects ({layer.in_channels}, x, y, z), got {in_shape}"
            )
        s = layer.stride
        if layer.padding == "same":
            spatial = tuple(-(-n // s) for n in in_shape[1:])
        else:
            spatial = tuple((n - k) // s + 1 for n, k in zip(in_shape[1:], layer.kernel))
        if min(spatial) < 1:
            raise ShapeError(f"layer {layer.name!r} output would be empty for input {in_shape}")
        return (layer.out_channels,) + spatial
    if kind == "maxpool3d":
        if len(in_shape) != 4:
            raise ShapeError(f"layer {layer.name!r} expects (c, x, y, z), got {in_shape}")
        spatial = tuple(n // w for n, w in zip(in_shape[1:], layer.window))
        if min(spatial) < 1:
            raise ShapeError(f"layer {layer.name!r} window {layer.window} too large for {in_shape}")
        return (in_shape[0],) + spatial
    if kind == "global_avg_pool":
        if len(in_shape) != 4:
            raise ShapeError(f"layer {layer.name!r} expects (c, x, y, z), got {in_shape}")
        return (in_shape[0],)
    if kind == "dense":
        if in_shape != (layer.in_features,):
            raise ShapeError(
                f"layer {layer.name!r} expects ({layer.in_features},), got {in_shape}"
            )
        return (layer.out_features,)
    if kind == "relu":
        return in_shape
    if kind == "flatten":
        return (int(np.prod(in_shape)),)
    if kind == "upsample3d":
        if len(in_shape) != 4:
            raise ShapeError(f"layer {layer.name!r} expects (c, x, y, z), got {in_shape}")
        return (in_shape[0],) + tuple(n * layer.factor for n in in_shape[1:])
    raise ShapeError(f"unknown layer kind {kind!r}")


def _conv3d_forward(layer: Conv3d, w: LayerWeights, a: np.ndarray) -> np.ndarray:
    pads = _conv_pads(layer, a.shape[1:])
    ap = np.pad(a, [(0, 0)] + pads)
    win = sliding_window_view(ap, (a.shape[0],) + layer.kernel)[0]
    s = layer.stride
    win = win[::s, ::s, ::s]
    ox, oy, oz = win.shape[:3]
    flat = win.reshape(ox * oy * oz, -1) @ w.weight.reshape(layer.out_channels, -1).T
    out = flat.T.reshape(layer.out_channels, ox, oy, oz)
    return out + w.bias[:, None, None, None]


def _conv3d_vjp(layer: Conv3d, w: LayerWeights, a: np.ndarray, cot: np.ndarray) -> np.ndarray:
    pads = _conv_pads(layer, a.shape[1:])
    s = layer.stride
    padded_shape = (a.shape[0],) + tuple(n + lo + hi for n, (lo, hi) in zip(a.shape[1:], pads))
    grad = np.zeros(padded_shape)
    _, ox, oy, oz = cot.shape
    for dx in range(layer.kernel[0]):
        for dy in range(layer.kernel[1]):
            for dz in range(layer.kernel[2]):
                block = np.tensordot(w.weight[:, :, dx, dy, dz], cot, axes=(0, 0))
                grad[:, dx : dx + s * ox : s, dy : dy + s * oy : s, dz : dz + s * oz : s] += block
    sl = [slice(None)] + [slice(lo, lo + n) for n, (lo, _) in zip(a.shape[1:], pads)]
    return grad[tuple(sl)]


def _conv3d_param_grads(layer: Conv3d, a: np.ndarray, cot: np.ndarray):
    pads = _conv_pads(layer, a.shape[1:])
    ap = np.pad(a, [(0, 0)] + pads)
    win = sliding_window_view(ap, (a.shape[0],) + layer.kernel)[0]
    s = layer.stride
    win = win[::s, ::s, ::s]
    dw = np.tensordot(cot, win, axes=([1, 2, 3], [0, 1, 2]))
    return dw, cot.sum(axis=(1, 2, 3))


def _maxpool_core(layer: MaxPool3d, a: np.ndarray):
    wx, wy, wz = layer.window
    c, nx, ny, nz = a.shape
    ox, oy, oz = nx // wx, ny // wy, nz // wz
    core = a[:, : ox * wx, : oy * wy, : oz * wz]
    # (c, ox, oy, oz, wx*wy*wz) with window elements in row-major order so
    # argmax ties resolve to the lexicographically first coordinate
    windows = (
        core.reshape(c, ox, wx, oy, wy, oz, wz)
        .transpose(0, 1, 3, 5, 2, 4, 6)
        .reshape(c, ox, oy, oz, wx * wy * wz)
    )
    return windows, (ox, oy, oz)


def _maxpool_forward(layer: MaxPool3d, a: np.ndarray) -> np.ndarray:
    windows, _ = _maxpool_core(layer, a)
    return windows.max(axis=-1)


def _maxpool_vjp(layer: MaxPool3d, a: np.ndarray, cot: np.ndarray) -> np.ndarray:
    wx, wy, wz = layer.window
    windows, (ox, oy, oz) = _maxpool_core(layer, a)
    winners = windows.argmax(axis=-1)
    g = np.zeros_like(windows)
    np.put_along_axis(g, winners[..., None], cot[..., None], axis=-1)
    g = (
        g.reshape(a.shape[0], ox, oy, oz, wx, wy, wz)
        .transpose(0, 1, 4, 2, 5, 3, 6)
        .reshape(a.shape[0], ox * wx, oy * wy, oz * wz)
    )
    out = np.zeros_like(a)
    out[:, : ox * wx, : oy * wy, : oz * wz] = g
    return out


def layer_forward(layer: LayerSpec, a: np.ndarray, w: Optional[LayerWeights] = None) -> np.ndarray:
    """Apply `layer` to activation `a`."""
    a = as_f64(a)
    if output_shape(layer, a.shape) is None:  # pragma: no cover - output_shape raises
        raise ShapeError("unreachable")
    kind = layer.kind
    if kind == "conv3d":
        return _conv3d_forward(layer, w, a)
    if kind == "maxpool3d":
        return _maxpool_forward(layer, a)
    if kind == "global_avg_pool":
        return a.mean(axis=(1, 2, 3))
    if kind == "dense":
        return w.weight @ a + w.bias
    if kind == "relu":
        return np.maximum(a, 0.0)
    if kind == "flatten":
        return a.reshape(-1)
    if kind == "upsample3d":
        f = layer.factor
        return a.repeat(f, axis=1).repeat(f, axis=2).repeat(f, axis=3)
    raise ShapeError(f"unknown layer kind {kind!r}")


def layer_vjp(
    layer: LayerSpec, a: np.ndarray, s: np.ndarray, w: Optional[LayerWeights] = None
) -> np.ndarray:
    """Gradient of <layer(a), s> with respect to `a`, treating `s` as constant."""
    a = as_f64(a)
    s = as_f64(s)
    expected = output_shape(layer, a.shape)
    if s.shape != expected:
        raise ShapeError(
            f"cotangent shape {s.shape} does not match layer {layer.name!r} output {expected}"
        )
    kind = layer.kind
    if kind == "conv3d":
        return _conv3d_vjp(layer, w, a, s)
    if kind == "maxpool3d":
        return _maxpool_vjp(layer, a, s)
    if kind == "global_avg_pool":
        n = a[0].size
        return np.broadcast_to(s[:, None, None, None] / n, a.shape).copy()
    if kind == "dense":
        return w.weight.T @ s
    if kind == "relu":
        return s * (a > 0.0)
    if kind == "flatten":
        return s.reshape(a.shape)
    if kind == "upsample3d":
        f = layer.factor
        c, nx, ny, nz = a.shape
        return s.reshape(c, nx, f, ny, f, nz, f).sum(axis=(2, 4, 6))
    raise ShapeError(f"unknown layer kind {kind!r}")


def layer_param_grads(layer: LayerSpec, a: np.ndarray, cot: np.ndarray):
    """Gradients of <layer(a), cot> with respect to weight and bias.

    Returns None for layers without parameters.
    """
    if layer.kind == "conv3d":
        return _conv3d_param_grads(layer, as_f64(a), as_f64(cot))
    if layer.kind == "dense":
        return np.outer(cot, a), cot.copy()
    return None

"""Viewable outputs: legacy-VTK volumes, jet-colored binary PLY point
clouds, and the side-by-side run of all four methods."""

from __future__ import annotations

import struct
import time
from pathlib import Path

import numpy as np

from .errors import ShapeError
from .explain import Heatmap, TargetSelection, explain
from .network import NetworkSpec
from .numerics import normalize01
from .voxelize import VoxelGrid

METHODS = ("sa", "lrp", "gradcam", "lime")

_PLY_VERTEX = struct.Struct("<3f3B")


def jet_color(v: float) -> tuple[int, int, int]:
    """Piecewise-linear jet colormap; v is clamped to [0, 1] and each channel
    byte is the truncated 255-scale of clamp(1.5 - |4v - c|)."""
    r, g, b = _jet_bytes(np.array([v])).reshape(3)
    return int(r), int(g), int(b)


def _jet_bytes(values: np.ndarray) -> np.ndarray:
    v = np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0)
    channels = [np.clip(1.5 - np.abs(4.0 * v - c), 0.0, 1.0) for c in (3.0, 2.0, 1.0)]
    return np.stack([(c * 255.0).astype(np.uint8) for c in channels], axis=-1)


def _heat_values(heatmap) -> np.ndarray:
    values = heatmap.values if isinstance(heatmap, Heatmap) else np.asarray(heatmap, np.float64)
    if values.ndim != 3:
        raise ShapeError(f"expected a 3-D field, got shape {values.shape}")
    return values


def export_vtk(heatmap, path, title: str = "voxel relevance") -> None:
    """Legacy structured-points text file: fixed unit spacing, one value per
    line in x-fastest order, 9 significant digits."""
    values = _heat_values(heatmap)
    nx, ny, nz = values.shape
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN 0 0 0",
        "SPACING 1 1 1",
        f"POINT_DATA {values.size}",
        "SCALARS relevance float 1",
        "LOOKUP_TABLE default",
    ]
    lines.extend("%.9g" % v for v in values.transpose(2, 1, 0).ravel())
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def display_normalized(values: np.ndarray) -> np.ndarray:
    """Map relevance to [0, 1] for coloring. Fields with negative values get
    the symmetric rule 0.5 + v / (2 max|v|) so zero sits mid-scale and sign
    stays visible; non-negative fields are min-max normalized (constant
    fields go to all zeros)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size and values.min() < 0.0:
        return 0.5 + values / (2.0 * np.abs(values).max())
    return normalize01(values)


def export_ply_colored(grid: VoxelGrid, heatmap, threshold: float, path) -> None:
    """Binary little-endian PLY point cloud: one vertex per grid voxel at or
    above the threshold, at the voxel center, colored by the jet map of the
    heatmap value normalized over the emitted voxels."""
    heat = _heat_values(heatmap)
    if heat.shape != grid.values.shape:
        raise ShapeError(f"heatmap dims {heat.shape} do not match grid {grid.values.shape}")
    idx = np.argwhere(grid.values >= threshold)
    coords = (grid.origin + (idx + 0.5) * grid.edge).astype(np.float32)
    selected = heat[idx[:, 0], idx[:, 1], idx[:, 2]]
    colors = _jet_bytes(display_normalized(selected))

    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {len(idx)}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )
    body = b"".join(
        _PLY_VERTEX.pack(*coords[i], *colors[i]) for i in range(len(idx))
    )
    Path(path).write_bytes(header.encode("ascii") + body)


def compare_all(net: NetworkSpec, grid: VoxelGrid, out_dir, threshold: float = 0.5) -> Path:
    """Run all four methods with default configs on the same argmax target;
    write one VTK (raw values) and one PLY (display-normalized colors) per
    method plus a text manifest. Returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sel = TargetSelection("argmax")
    rows = []
    for method in METHODS:
        start = time.perf_counter()
        heatmap = explain(net, grid, method, sel)
        seconds = time.perf_counter() - start
        export_vtk(heatmap, out / f"{method}.vtk", title=f"{method} relevance")
        export_ply_colored(grid, heatmap, threshold, out / f"{method}.ply")
        rows.append(
            f"method={method} target={heatmap.target} "
            f"min={heatmap.values.min():.9g} max={heatmap.values.max():.9g} "
            f"seconds={seconds:.3f}"
        )
    manifest = out / "manifest.txt"
    manifest.write_text("\n".join(rows) + "\n", encoding="ascii")
    return manifest

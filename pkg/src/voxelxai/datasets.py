"""Synthetic labeled voxel shapes: boxes, spheres, and thin plates with
through-holes (a sheet-metal-part analog), at desk scale.

Generation is deterministic: the master seed spawns one child seed per
sample, so samples are independent and the dataset is reproducible
regardless of how the per-sample work is ordered.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError
from .voxelize import VoxelGrid, read_vxg, write_vxg

CLASS_NAMES = ("box", "sphere", "plate")


@dataclass
class ShapeDataset:
    grids: list[VoxelGrid]
    labels: np.ndarray
    class_names: tuple[str, ...] = CLASS_NAMES
    seed: int = 0

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.labels) != len(self.grids):
            raise DomainError("one label per grid required")
        if self.grids:
            dims = self.grids[0].dims
            if any(g.dims != dims for g in self.grids):
                raise DomainError("all grids in a dataset must share dims")
        if len(self.labels) and (
            self.labels.min() < 0 or self.labels.max() >= len(self.class_names)
        ):
            raise DomainError("label outside class range")

    def __len__(self) -> int:
        return len(self.grids)

    @property
    def resolution(self) -> int:
        return self.grids[0].dims[0]


def _centers(resolution: int) -> np.ndarray:
    return np.arange(resolution) + 0.5


def _box(res: int, rng: np.random.Generator) -> np.ndarray:
    # min half-extent keeps boxes chunky so a flat box cannot pass for a plate
    half = rng.uniform(0.19 * res, 0.3 * res, size=3)
    center = np.array([rng.uniform(h + 1.0, res - h - 1.0) for h in half])
    c = _centers(res)
    inside = [np.abs(c - center[ax]) <= half[ax] for ax in range(3)]
    return (
        inside[0][:, None, None] & inside[1][None, :, None] & inside[2][None, None, :]
    ).astype(np.float64)


def _sphere(res: int, rng: np.random.Generator) -> np.ndarray:
    r = rng.uniform(0.25 * res, 0.35 * res)
    center = rng.uniform(r + 1.0, res - r - 1.0, size=3)
    c = _centers(res)
    d2 = (
        (c[:, None, None] - center[0]) ** 2
        + (c[None, :, None] - center[1]) ** 2
        + (c[None, None, :] - center[2]) ** 2
    )
    return (d2 <= r * r).astype(np.float64)


def _plate(res: int, rng: np.random.Generator) -> np.ndarray:
    normal = int(rng.integers(0, 3))
    planar = [ax for ax in range(3) if ax != normal]
    half_thick = rng.uniform(0.6, 1.0)
    # cap keeps a one-voxel wall margin even at the minimum resolution
    half_span = rng.uniform(0.3 * res, 0.42 * res, size=2).clip(max=(res - 3) / 2)
    center = np.zeros(3)
    center[normal] = rng.uniform(half_thick + 1.0, res - half_thick - 1.0)
    for i, ax in enumerate(planar):
        center[ax] = rng.uniform(half_span[i] + 1.0, res - half_span[i] - 1.0)

    c = _centers(res)
    masks = [None, None, None]
    masks[normal] = np.abs(c - center[normal]) <= half_thick
    for i, ax in enumerate(planar):
        masks[ax] = np.abs(c - center[ax]) <= half_span[i]
    occ = masks[0][:, None, None] & masks[1][None, :, None] & masks[2][None, None, :]

    # punch 2-4 circular through-holes along the normal axis
    n_holes = int(rng.integers(2, 5))
    pu, pv = planar
    gu = c.reshape([-1 if ax == pu else 1 for ax in range(3)])
    gv = c.reshape([-1 if ax == pv else 1 for ax in range(3)])
    for _ in range(n_holes):
        # holes stay a voxel clear of the rim so the outline remains rectangular
        radius = rng.uniform(1.3, 2.0)
        play = np.maximum(half_span - radius - 1.0, 0.0)  # degenerate at tiny resolutions
        hu = rng.uniform(center[pu] - play[0], center[pu] + play[0])
        hv = rng.uniform(center[pv] - play[1], center[pv] + play[1])
        hole = (gu - hu) ** 2 + (gv - hv) ** 2 <= radius * radius
        occ &= ~hole
    return occ.astype(np.float64)


_MAKERS = (_box, _sphere, _plate)


def generate_shape_dataset(n: int, resolution: int = 16, seed: int = 0) -> ShapeDataset:
    """n labeled occupancy grids, labels cycling box/sphere/plate.

    Labels are assigned round-robin so class counts differ by at most one
    and any contiguous split stays balanced.
    """
    if resolution < 8:
        raise DomainError(f"resolution must be at least 8, got {resolution}")
    if n < len(CLASS_NAMES):
        raise DomainError(f"need at least {len(CLASS_NAMES)} samples, got {n}")
    children = np.random.SeedSequence(seed).spawn(n)
    grids = []
    labels = np.arange(n) % len(CLASS_NAMES)
    for i in range(n):
        rng = np.random.default_rng(children[i])
        values = _MAKERS[labels[i]](resolution, rng)
        grids.append(VoxelGrid(values, 1.0, np.zeros(3)))
    return ShapeDataset(grids, labels, CLASS_NAMES, seed)


def save_dataset(dataset: ShapeDataset, out_dir) -> None:
    """Write one VXG per sample plus labels.csv and dataset.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "label", "class_name"])
        for i, label in enumerate(dataset.labels):
            writer.writerow([i, int(label), dataset.class_names[label]])
    meta = {
        "count": len(dataset),
        "resolution": dataset.resolution,
        "classes": list(dataset.class_names),
        "seed": dataset.seed,
    }
    (out / "dataset.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    for i, grid in enumerate(dataset.grids):
        write_vxg(grid, out / f"sample_{i:04d}.vxg")


def load_dataset(in_dir) -> ShapeDataset:
    src = Path(in_dir)
    meta_path = src / "dataset.json"
    labels_path = src / "labels.csv"
    if not meta_path.exists() or not labels_path.exists():
        raise FormatError(f"{src} is not a dataset directory (missing metadata)")
    meta = json.loads(meta_path.read_text())
    with open(labels_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    labels = np.array([int(r["label"]) for r in rows], dtype=np.int64)
    grids = [read_vxg(src / f"sample_{i:04d}.vxg") for i in range(len(rows))]
    return ShapeDataset(grids, labels, tuple(meta["classes"]), int(meta["seed"]))

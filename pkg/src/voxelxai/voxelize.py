"""Mesh to occupancy-grid conversion plus the VXG grid container.

The grid is anchored to the mesh bounding box: the named resolution is the
cell count along the longest axis, voxels are cubic, and one empty voxel of
margin surrounds the part on every side. The bounding box is inflated by a
tiny deterministic pad (1e-6 of the voxel edge) before gridding so that
axis-aligned faces never sit exactly on a cell boundary; without the pad,
a face on a boundary would bleed into the margin cells.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FormatError, UsageError
from .mesh import TriangleMesh

VXG_MAGIC = b"VXG1"


@dataclass
class VoxelGrid:
    """Occupancy values on a regular grid of cubic voxels.

    values: (nx, ny, nz) in [0, 1]; edge: voxel edge length in model units;
    origin: model-unit coordinates of the grid corner (voxel (0,0,0) spans
    origin .. origin+edge on each axis).
    """

    values: np.ndarray
    edge: float
    origin: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.origin = np.asarray(self.origin, dtype=np.float64).reshape(3)
        if self.values.ndim != 3 or min(self.values.shape) < 1:
            raise DomainError(f"grid needs positive 3-D dims, got {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise DomainError("grid values must be finite")
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise DomainError("grid values must lie in [0, 1]")
        self.edge = float(self.edge)
        if not self.edge > 0:
            raise DomainError("voxel edge must be positive")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.values.shape

    def centers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Voxel-center coordinates along each axis, in model units."""
        return tuple(
            self.origin[ax] + (np.arange(self.dims[ax]) + 0.5) * self.edge for ax in range(3)
        )


def grid_to_points(grid: VoxelGrid, threshold: float) -> np.ndarray:
    """Centers of voxels with value >= threshold, as rows (x, y, z, value)."""
    if not 0.0 <= threshold <= 1.0:
        raise DomainError(f"threshold must lie in [0, 1], got {threshold}")
    idx = np.argwhere(grid.values >= threshold)
    coords = grid.origin + (idx + 0.5) * grid.edge
    vals = grid.values[idx[:, 0], idx[:, 1], idx[:, 2]]
    return np.column_stack([coords, vals])


def voxelize(mesh: TriangleMesh, resolution: int = 32, mode: str = "solid") -> VoxelGrid:
    """Rasterize a mesh into a cubic-voxel occupancy grid.

    resolution is the voxel count along the longest bounding-box axis
    (other axes scale to keep voxels cubic); mode "surface" marks cells a
    triangle passes through, "solid" additionally fills the interior by
    parity ray casting along +x through voxel centers.
    """
    if mode not in ("surface", "solid"):
        raise UsageError(f"mode must be 'surface' or 'solid', got {mode!r}")
    resolution = int(resolution)
    if resolution < 3:
        raise DomainError("resolution must be at least 3 (part plus one voxel of margin)")
    if len(mesh) == 0:
        raise DomainError("cannot voxelize an empty mesh")
    bmin, bmax = mesh.bounds()
    extents = bmax - bmin
    emax = float(extents.max())
    if emax <= 0:
        raise DomainError("mesh has zero extent on every axis")

    pad = 1e-6 * emax / (resolution - 2)
    edge = (emax + 2 * pad) / (resolution - 2)
    dims = tuple(int(np.ceil((e + 2 * pad) / edge)) + 2 for e in extents)
    origin = bmin - edge - pad

    tris = mesh.triangle_coords()
    occ = _surface_cells(tris, origin, edge, dims)
    if mode == "solid":
        occ |= _interior_cells(tris, origin, edge, dims)
    return VoxelGrid(occ.astype(np.float64), edge, origin)


def _surface_cells(tris, origin, edge, dims) -> np.ndarray:
    occ = np.zeros(dims, dtype=bool)
    half = edge / 2.0
    for corners in tris:
        local = corners - origin
        lo = np.floor(local.min(axis=0) / edge).astype(int) - 1
        hi = np.floor(local.max(axis=0) / edge).astype(int) + 1
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, np.array(dims) - 1)
        if (lo > hi).any():
            continue
        ii, jj, kk = np.meshgrid(
            np.arange(lo[0], hi[0] + 1),
            np.arange(lo[1], hi[1] + 1),
            np.arange(lo[2], hi[2] + 1),
            indexing="ij",
        )
        cells = np.column_stack([ii.ravel(), jj.ravel(), kk.ravel()])
        centers = (cells + 0.5) * edge
        hit = cells[_tri_box_overlap(local, centers, half)]
        occ[hit[:, 0], hit[:, 1], hit[:, 2]] = True
    return occ


def _tri_box_overlap(corners, centers, half) -> np.ndarray:
    """Separating-axis overlap of one triangle with many cubic boxes.

    corners: (3, 3) triangle vertices; centers: (n, 3) box centers; half:
    half edge length. Touching counts as overlap. Returns a bool mask (n,).
    """
    # u[k]: (n, 3) vertex k relative to each box center
    u = [corners[k][None, :] - centers for k in range(3)]
    alive = np.ones(len(centers), dtype=bool)

    # box face normals: plain AABB check per axis
    for ax in range(3):
        p = np.stack([u[0][:, ax], u[1][:, ax], u[2][:, ax]])
        alive &= ~((p.min(axis=0) > half) | (p.max(axis=0) < -half))

    edges = [corners[1] - corners[0], corners[2] - corners[1], corners[0] - corners[2]]
    axes = [np.cross(edges[0], edges[1])]
    for e in edges:
        for unit in np.eye(3):
            axes.append(np.cross(e, unit))

    for a in axes:
        r = half * np.abs(a).sum()
        if r == 0.0 and not np.any(a):
            continue  # degenerate cross product, no constraint
        p = np.stack([u[k] @ a for k in range(3)])
        alive &= ~((p.min(axis=0) > r) | (p.max(axis=0) < -r))
        if not alive.any():
            break
    return alive


def _interior_cells(tris, origin, edge, dims) -> np.ndarray:
    """Parity ray casting: one +x ray through each (y, z) column of voxel
    centers, offset by ~1e-7 of the edge to dodge edge-on hits. The two
    offsets have an irrational ratio so the ray cannot track a shared
    triangle edge (e.g. the y=z diagonal of a quad split) and count the
    crossing twice."""
    nx, ny, nz = dims
    occ = np.zeros(dims, dtype=bool)
    eps_y = 1e-7 * edge
    eps_z = (2.0**-0.5) * 1e-7 * edge
    ys = origin[1] + (np.arange(ny) + 0.5) * edge + eps_y
    zs = origin[2] + (np.arange(nz) + 0.5) * edge + eps_z
    xs = origin[0] + (np.arange(nx) + 0.5) * edge

    # per-triangle yz-plane barycentric setup
    a = tris[:, 0]
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    det = e1[:, 1] * e2[:, 2] - e1[:, 2] * e2[:, 1]
    ok = np.abs(det) > 1e-30  # edge-on triangles never cross a generic ray
    a, e1, e2, det = a[ok], e1[ok], e2[ok], det[ok]
    if len(a) == 0:
        return occ

    for j, ry in enumerate(ys):
        for k, rz in enumerate(zs):
            dy = ry - a[:, 1]
            dz = rz - a[:, 2]
            l1 = (dy * e2[:, 2] - dz * e2[:, 1]) / det
            l2 = (dz * e1[:, 1] - dy * e1[:, 2]) / det
            hit = (l1 >= 0) & (l2 >= 0) & (l1 + l2 <= 1)
            if not hit.any():
                continue
            cross_x = a[hit, 0] + l1[hit] * e1[hit, 0] + l2[hit] * e2[hit, 0]
            # odd number of crossings beyond the center means inside
            counts = (cross_x[None, :] > xs[:, None]).sum(axis=1)
            occ[:, j, k] = counts % 2 == 1
    return occ


def save_vxg(grid: VoxelGrid) -> bytes:
    """Serialize a grid: magic, u32 dims, f32 edge, f32 origin, f32 values."""
    nx, ny, nz = grid.dims
    head = VXG_MAGIC + struct.pack("<3I", nx, ny, nz)
    head += struct.pack("<f", grid.edge) + struct.pack("<3f", *grid.origin)
    return head + np.ascontiguousarray(grid.values, dtype="<f4").tobytes()


def load_vxg(data: bytes) -> VoxelGrid:
    """Parse VXG bytes back into a VoxelGrid."""
    if len(data) < 32 or data[:4] != VXG_MAGIC:
        raise FormatError("not a VXG container (bad magic)")
    nx, ny, nz = struct.unpack_from("<3I", data, 4)
    (edge,) = struct.unpack_from("<f", data, 16)
    origin = np.array(struct.unpack_from("<3f", data, 20), dtype=np.float64)
    count = nx * ny * nz
    body = np.frombuffer(data, dtype="<f4", offset=32)
    if body.size != count:
        raise FormatError(f"container holds {body.size} values, dims need {count}")
    values = body.astype(np.float64).reshape(nx, ny, nz)
    try:
        return VoxelGrid(values, float(edge), origin)
    except DomainError as exc:
        raise FormatError(f"container violates grid invariants: {exc}") from exc


def write_vxg(grid: VoxelGrid, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_vxg(grid))


def read_vxg(path) -> VoxelGrid:
    with open(path, "rb") as fh:
        return load_vxg(fh.read())

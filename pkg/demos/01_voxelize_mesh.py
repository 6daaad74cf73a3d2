"""Voxelize a triangle mesh in both occupancy modes.

Builds a small L-bracket out of two boxes, rasterizes it onto a cubic
grid, and writes a colored point cloud of the occupied voxels so the
result can be opened in any PLY viewer (MeshLab, CloudCompare, ...).
"""

from pathlib import Path

import numpy as np

from voxelxai import export_ply_colored, mesh_from_triangles, voxelize

OUT_DIR = Path(__file__).resolve().parent / "out"


def box_triangles(lo, hi):
    """Twelve triangles covering the axis-aligned box [lo, hi]."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    corners = np.array([[lo[0], lo[1], lo[2]],
                        [hi[0], lo[1], lo[2]],
                        [hi[0], hi[1], lo[2]],
                        [lo[0], hi[1], lo[2]],
                        [lo[0], lo[1], hi[2]],
                        [hi[0], lo[1], hi[2]],
                        [hi[0], hi[1], hi[2]],
                        [lo[0], hi[1], hi[2]]])
    quads = [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
             (2, 3, 7, 6), (1, 2, 6, 5), (3, 0, 4, 7)]
    tris = []
    for a, b, c, d in quads:
        tris.append(corners[[a, b, c]])
        tris.append(corners[[a, c, d]])
    return tris


def main() -> None:
    # An L-bracket: a flat base plus an upright wall along one edge.
    tris = box_triangles((0, 0, 0), (10, 10, 2)) + box_triangles((0, 0, 0), (2, 10, 10))
    mesh = mesh_from_triangles(tris)
    print(f"mesh: {len(mesh.vertices)} vertices, {len(mesh.triangles)} triangles")

    for mode in ("solid", "surface"):
        grid = voxelize(mesh, resolution=24, mode=mode)
        occupied = int(grid.values.sum())
        total = grid.values.size
        print(f"{mode:>7}: {occupied}/{total} voxels occupied "
              f"(edge {grid.edge:.3f}, origin {grid.origin})")

        # Color by height so the upright wall stands out in the viewer.
        heat = np.broadcast_to(
            np.arange(grid.values.shape[2], dtype=np.float64),
            grid.values.shape).copy()
        OUT_DIR.mkdir(parents=True, exist_ok=True)
        path = OUT_DIR / f"bracket_{mode}.ply"
        export_ply_colored(grid, heat, 0.5, path)
        print(f"         wrote {path}")

    print("surface mode keeps only cells a triangle passes through; "
          "solid mode additionally fills the interior by parity ray casting.")


if __name__ == "__main__":
    main()

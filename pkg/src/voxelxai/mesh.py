"""Triangle meshes and STL ingestion (both ASCII and binary encodings).

Facet normals in the file are ignored; anything downstream that needs a
normal recomputes it from the vertex winding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FormatError


@dataclass
class TriangleMesh:
    """Indexed triangle soup: vertices (n, 3) in model units, triangles (m, 3)
    as vertex indices."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.isfinite(self.vertices).all():
            raise DomainError("mesh vertices must be finite")
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise DomainError("triangle references a vertex that does not exist")

    def __len__(self) -> int:
        return len(self.triangles)

    def triangle_coords(self) -> np.ndarray:
        """Coordinates per triangle, shape (m, 3 corners, 3 xyz)."""
        return self.vertices[self.triangles]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.triangles) == 0:
            raise DomainError("mesh has no triangles")
        used = self.vertices[np.unique(self.triangles)]
        return used.min(axis=0), used.max(axis=0)

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.vertices + np.asarray(offset, dtype=np.float64), self.triangles)


def mesh_from_triangles(tris) -> TriangleMesh:
    """Build an indexed mesh from raw corner coordinates (m, 3, 3), merging
    exactly-equal vertices."""
    tris = np.asarray(tris, dtype=np.float64).reshape(-1, 3, 3)
    index: dict[tuple, int] = {}
    verts: list[tuple] = []
    faces = np.zeros((len(tris), 3), dtype=np.int64)
    for t, corners in enumerate(tris):
        for c in range(3):
            key = tuple(corners[c])
            if key not in index:
                index[key] = len(verts)
                verts.append(key)
            faces[t, c] = index[key]
    return TriangleMesh(np.array(verts, dtype=np.float64).reshape(-1, 3), faces)


def parse_stl(data: bytes) -> TriangleMesh:
    """Parse STL bytes, auto-detecting the encoding.

    Files whose payload decodes as text and starts with "solid" take the
    ASCII route (grammar errors report a 1-based line number); everything
    else is treated as binary (80-byte header, uint32 count, 50-byte
    records, little-endian).
    """
    if _looks_ascii(data):
        return _parse_ascii(data)
    return _parse_binary(data)


def _looks_ascii(data: bytes) -> bool:
    if not data.lstrip()[:5].lower() == b"solid":
        return False
    try:
        data.decode("utf-8")
    except UnicodeDecodeError:
        return False
    return True


def _parse_ascii(data: bytes) -> TriangleMesh:
    lines = data.decode("utf-8").splitlines()
    pos = 0

    def current():
        return lines[pos].strip() if pos < len(lines) else None

    def advance():
        nonlocal pos
        pos += 1
        while pos < len(lines) and not lines[pos].strip():
            pos += 1

    def fail(expected):
        got = current()
        where = f"line {pos + 1}"
        if got is None:
            raise FormatError(f"{where}: unexpected end of file, expected {expected}")
        raise FormatError(f"{where}: expected {expected}, got {got!r}")

    def expect(keyword):
        line = current()
        if line is None or not line.lower().startswith(keyword):
            fail(repr(keyword))
        advance()
        return line

    def read_floats(line, keyword, count):
        parts = line.split()
        values = parts[len(keyword.split()) :]
        if len(values) != count:
            raise FormatError(
                f"line {pos + 1}: {keyword} needs {count} numbers, got {len(values)}"
            )
        try:
            return [float(v) for v in values]
        except ValueError:
            raise FormatError(f"line {pos + 1}: {keyword} has a non-numeric value") from None

    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    expect("solid")
    tris = []
    while True:
        line = current()
        if line is None:
            fail("'facet' or 'endsolid'")
        low = line.lower()
        if low.startswith("endsolid"):
            break
        if not low.startswith("facet"):
            fail("'facet' or 'endsolid'")
        if not low.startswith("facet normal"):
            fail("'facet normal'")
        read_floats(line, "facet normal", 3)  # validated, then ignored
        advance()
        expect("outer loop")
        corners = []
        for _ in range(3):
            vline = current()
            if vline is None or not vline.lower().startswith("vertex"):
                fail("'vertex'")
            corners.append(read_floats(vline, "vertex", 3))
            advance()
        expect("endloop")
        expect("endfacet")
        tris.append(corners)
    arr = np.array(tris, dtype=np.float64).reshape(-1, 3, 3)
    if not np.isfinite(arr).all():
        raise FormatError("vertex coordinates must be finite")
    return mesh_from_triangles(arr)


_RECORD = struct.Struct("<12fH")  # normal, 3 vertices, attribute byte count


def _parse_binary(data: bytes) -> TriangleMesh:
    if len(data) < 84:
        raise FormatError(f"binary container needs at least 84 bytes, got {len(data)}")
    (count,) = struct.unpack_from("<I", data, 80)
    need = 84 + count * _RECORD.size
    if len(data) < need:
        raise FormatError(
            f"declared {count} triangles but container holds "
            f"{(len(data) - 84) // _RECORD.size} complete records"
        )
    tris = np.zeros((count, 3, 3), dtype=np.float64)
    for t in range(count):
        values = _RECORD.unpack_from(data, 84 + t * _RECORD.size)
        tris[t] = np.array(values[3:12], dtype=np.float64).reshape(3, 3)
    if not np.isfinite(tris).all():
        raise FormatError("vertex coordinates must be finite")
    return mesh_from_triangles(tris)


def ascii_stl(mesh: TriangleMesh, name: str = "part") -> bytes:
    """Serialize a mesh as ASCII STL (normals recomputed from winding)."""
    out = [f"solid {name}"]
    for corners in mesh.triangle_coords():
        n = np.cross(corners[1] - corners[0], corners[2] - corners[0])
        norm = np.linalg.norm(n)
        n = n / norm if norm > 0 else n
        out.append(f"  facet normal {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
        out.append("    outer loop")
        for c in corners:
            out.append(f"      vertex {c[0]:.9g} {c[1]:.9g} {c[2]:.9g}")
        out.append("    endloop")
        out.append("  endfacet")
    out.append(f"endsolid {name}")
    return ("\n".join(out) + "\n").encode("utf-8")


def binary_stl(mesh: TriangleMesh, header: bytes = b"") -> bytes:
    """Serialize a mesh as binary STL."""
    head = (header or b"voxelxai binary stl")[:80].ljust(80, b"\x00")
    parts = [head, struct.pack("<I", len(mesh))]
    for corners in mesh.triangle_coords():
        n = np.cross(corners[1] - corners[0], corners[2] - corners[0])
        norm = np.linalg.norm(n)
        n = n / norm if norm > 0 else n
        parts.append(_RECORD.pack(*n, *corners.reshape(-1), 0))
    return b"".join(parts)

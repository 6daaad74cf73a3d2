"""Dense array kernels shared by every other module.

Arrays are plain numpy float64 ndarrays in row-major (C) order, last axis
fastest. The flat index of coordinate (i, j, k) in a grid of dims
(nx, ny, nz) is i*ny*nz + j*nz + k; `flat_index` / `coords_of` make that
convention explicit and testable.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ShapeError


def as_f64(x) -> np.ndarray:
    """Return `x` as a C-contiguous float64 array (copying only if needed)."""
    return np.ascontiguousarray(x, dtype=np.float64)


def require_finite(a: np.ndarray, what: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{what} contains NaN or Inf values")
    return a


def flat_index(dims, coords) -> int:
    """Row-major flat index of `coords` in a grid of extents `dims`."""
    idx = 0
    for n, c in zip(dims, coords):
        if not 0 <= c < n:
            raise DomainError(f"coordinate {coords} out of bounds for dims {tuple(dims)}")
        idx = idx * n + c
    return idx


def coords_of(dims, flat: int) -> tuple:
    """Inverse of `flat_index`."""
    total = int(np.prod(dims))
    if not 0 <= flat < total:
        raise DomainError(f"flat index {flat} out of bounds for dims {tuple(dims)}")
    coords = []
    for n in reversed(dims):
        coords.append(flat % n)
        flat //= n
    return tuple(reversed(coords))


def cosine_distance(a, b) -> float:
    """Cosine distance 1 - (a.b)/(|a||b|) between two 1-D vectors.

    Returns a value in [0, 2]: 0 for parallel, 1 for orthogonal, 2 for
    anti-parallel vectors. Raises DomainError when either vector has zero
    norm (the cosine is undefined there).
    """
    a = as_f64(a)
    b = as_f64(b)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise ShapeError(f"expected equal-length vectors, got {a.shape} and {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise DomainError("cosine distance is undefined for zero-norm vectors")
    d = 1.0 - float(np.dot(a, b)) / (na * nb)
    # rounding can overshoot the mathematical range by ~1 ulp
    return min(max(d, 0.0), 2.0)


def argmax(v) -> int:
    """Index of the largest element; ties resolve to the lowest index."""
    v = as_f64(v)
    if v.ndim != 1 or v.size == 0:
        raise DomainError("argmax requires a nonempty 1-D vector")
    return int(np.argmax(v))


def _sample_positions(n_in: int, n_out: int) -> np.ndarray:
    # corner-to-corner: output sample j sits at j*(n_in-1)/(n_out-1)
    if n_out == 1:
        return np.zeros(1)
    return np.arange(n_out, dtype=np.float64) * ((n_in - 1) / (n_out - 1))


def trilinear_resample(t, new_dims) -> np.ndarray:
    """Resample a 3-axis field onto `new_dims` by trilinear interpolation.

    Sample positions map corner-to-corner, so the first and last samples of
    every axis are reproduced exactly and a field affine in each axis is
    reproduced exactly at all output positions.
    """
    t = as_f64(t)
    if t.ndim != 3:
        raise ShapeError(f"expected a 3-axis field, got {t.ndim} axes")
    new_dims = tuple(int(d) for d in new_dims)
    if len(new_dims) != 3:
        raise ShapeError("new_dims must have three entries")
    if min(t.shape) < 1 or min(new_dims) < 1:
        raise DomainError("all extents must be at least 1")
    if new_dims == t.shape:
        return t.copy()

    lo, hi, frac = [], [], []
    for n_in, n_out in zip(t.shape, new_dims):
        pos = _sample_positions(n_in, n_out)
        i0 = np.minimum(pos.astype(np.int64), max(n_in - 2, 0))
        lo.append(i0)
        hi.append(np.minimum(i0 + 1, n_in - 1))
        frac.append(pos - i0)

    fx = frac[0][:, None, None]
    fy = frac[1][None, :, None]
    fz = frac[2][None, None, :]
    out = np.zeros(new_dims)
    for cx, wx in ((lo[0], 1.0 - fx), (hi[0], fx)):
        for cy, wy in ((lo[1], 1.0 - fy), (hi[1], fy)):
            for cz, wz in ((lo[2], 1.0 - fz), (hi[2], fz)):
                corner = t[np.ix_(cx, cy, cz)]
                out += wx * wy * wz * corner
    return out


def nearest_resample(t, new_dims) -> np.ndarray:
    """Resample a 3-axis field onto `new_dims` by nearest-neighbor lookup."""
    t = as_f64(t)
    if t.ndim != 3:
        raise ShapeError(f"expected a 3-axis field, got {t.ndim} axes")
    new_dims = tuple(int(d) for d in new_dims)
    if min(t.shape) < 1 or min(new_dims) < 1:
        raise DomainError("all extents must be at least 1")
    idx = [
        np.clip(np.rint(_sample_positions(n_in, n_out)).astype(np.int64), 0, n_in - 1)
        for n_in, n_out in zip(t.shape, new_dims)
    ]
    return t[np.ix_(*idx)]


def normalize01(a: np.ndarray) -> np.ndarray:
    """Min-max normalize to [0, 1]; a constant field maps to all zeros."""
    a = as_f64(a)
    lo = float(a.min()) if a.size else 0.0
    hi = float(a.max()) if a.size else 0.0
    if hi == lo:
        return np.zeros_like(a)
    return (a - lo) / (hi - lo)

"""Independent reference implementations used only to check the library.

Everything here is written as directly as possible (explicit loops, no
shared code with the package) so the two routes can disagree when one is
wrong.
"""

import numpy as np


def naive_conv3d(a, weight, bias, stride=1, padding="same"):
    """Direct-loop 3D convolution. a: (ci, nx, ny, nz); weight: (co, ci, kx, ky, kz)."""
    ci, nx, ny, nz = a.shape
    co = weight.shape[0]
    kx, ky, kz = weight.shape[2:]
    dims_in = (nx, ny, nz)
    kernel = (kx, ky, kz)
    pads = []
    for n, k in zip(dims_in, kernel):
        if padding == "same":
            out = -(-n // stride)
            total = max((out - 1) * stride + k - n, 0)
            pads.append((total // 2, total - total // 2))
        else:
            pads.append((0, 0))
    out_dims = []
    for n, k, (lo, hi) in zip(dims_in, kernel, pads):
        out_dims.append((n + lo + hi - k) // stride + 1)
    ox, oy, oz = out_dims
    out = np.zeros((co, ox, oy, oz))
    for o in range(co):
        for x in range(ox):
            for y in range(oy):
                for z in range(oz):
                    acc = 0.0
                    for i in range(ci):
                        for dx in range(kx):
                            for dy in range(ky):
                                for dz in range(kz):
                                    px = x * stride + dx - pads[0][0]
                                    py = y * stride + dy - pads[1][0]
                                    pz = z * stride + dz - pads[2][0]
                                    if 0 <= px < nx and 0 <= py < ny and 0 <= pz < nz:
                                        acc += weight[o, i, dx, dy, dz] * a[i, px, py, pz]
                    out[o, x, y, z] = acc + bias[o]
    return out


def naive_maxpool3d(a, window):
    wx, wy, wz = window
    c, nx, ny, nz = a.shape
    ox, oy, oz = nx // wx, ny // wy, nz // wz
    out = np.zeros((c, ox, oy, oz))
    for i in range(c):
        for x in range(ox):
            for y in range(oy):
                for z in range(oz):
                    out[i, x, y, z] = a[
                        i, x * wx : (x + 1) * wx, y * wy : (y + 1) * wy, z * wz : (z + 1) * wz
                    ].max()
    return out


def finite_difference_gradient(f, x, h=1e-4):
    """Central finite differences of a scalar function of an array."""
    # order="C" so the flattened arrays are guaranteed views; np.array keeps
    # the source layout by default and reshape would silently copy
    x = np.array(x, dtype=np.float64, order="C")
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gf[i] = (fp - fm) / (2.0 * h)
    return g


def max_relative_error(analytic, numeric, floor=1e-6):
    """Max |analytic - numeric| / |analytic| over components with |analytic| > floor."""
    analytic = np.asarray(analytic).reshape(-1)
    numeric = np.asarray(numeric).reshape(-1)
    mask = np.abs(analytic) > floor
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(analytic[mask] - numeric[mask]) / np.abs(analytic[mask])))


def brute_force_weighted_ridge(masks, y, w, lam):
    """Weighted ridge by explicit normal equations, intercept unpenalized."""
    masks = np.asarray(masks, dtype=np.float64)
    n, s = masks.shape
    a = np.hstack([np.ones((n, 1)), masks])
    m = np.zeros((s + 1, s + 1))
    rhs = np.zeros(s + 1)
    for i in range(n):
        m += w[i] * np.outer(a[i], a[i])
        rhs += w[i] * y[i] * a[i]
    m += lam * np.diag([0.0] + [1.0] * s)
    beta = np.linalg.solve(m, rhs)
    return beta[1:], beta[0]


def trilinear_at(field, px, py, pz):
    """Evaluate trilinear interpolation of a 3-D field at one fractional position."""
    nx, ny, nz = field.shape

    def split(p, n):
        i0 = min(int(np.floor(p)), max(n - 2, 0))
        i0 = max(i0, 0)
        return i0, min(i0 + 1, n - 1), p - i0

    x0, x1, fx = split(px, nx)
    y0, y1, fy = split(py, ny)
    z0, z1, fz = split(pz, nz)
    val = 0.0
    for xi, wx in ((x0, 1 - fx), (x1, fx)):
        for yi, wy in ((y0, 1 - fy), (y1, fy)):
            for zi, wz in ((z0, 1 - fz), (z1, fz)):
                val += wx * wy * wz * field[xi, yi, zi]
    return val

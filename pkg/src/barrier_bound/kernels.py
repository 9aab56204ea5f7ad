"""Hot loops: periodic face differences, divergence, 4th-order gradients and pair scans.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with identical semantics. The dispatching wrappers at the bottom pick
one according to :data:`barrier_bound._accel.NUMBA_ENABLED`; both are importable
directly for testing and benchmarking.
"""
from __future__ import annotations

import numpy as np

from ._accel import NUMBA_ENABLED, njit

# --- numpy path ---------------------------------------------------------------


def face_gradients_np(u, hx, hy):
    """Discrete gradients on x-faces ``(i+1/2, j)`` and y-faces ``(i, j+1/2)``.

    Returns ``(xi_x, xi_y, eta_x, eta_y)``: the normal difference across each
    face and the tangential component averaged from the two adjacent central
    differences.
    """
    up = np.roll(u, -1, axis=0)
    dn = np.roll(u, 1, axis=0)
    rt = np.roll(u, -1, axis=1)
    lf = np.roll(u, 1, axis=1)
    cy = rt - lf
    cx = up - dn
    xi_x = (up - u) / hx
    xi_y = (cy + np.roll(cy, -1, axis=0)) / (4.0 * hy)
    eta_y = (rt - u) / hy
    eta_x = (cx + np.roll(cx, -1, axis=1)) / (4.0 * hx)
    return xi_x, xi_y, eta_x, eta_y


def divergence_np(fx, fy, hx, hy):
    return (fx - np.roll(fx, 1, axis=0)) / hx + (fy - np.roll(fy, 1, axis=1)) / hy


def gradient4_np(u, hx, hy):
    """Fourth-order periodic central differences along both axes."""
    def d(axis, h):
        return (8.0 * (np.roll(u, -1, axis) - np.roll(u, 1, axis))
                - (np.roll(u, -2, axis) - np.roll(u, 2, axis))) / (12.0 * h)
    return d(0, hx), d(1, hy)


def pair_max_1d_np(coords, vals, circumference, chunk=512):
    """``max_{i != j} vals[j] - vals[i] - |x_j - x_i|`` (wrapped when ``circumference > 0``)."""
    n = coords.shape[0]
    best, bi, bj = -np.inf, -1, -1
    for s in range(0, n, chunk):
        xi = coords[s:s + chunk, None]
        d = np.abs(coords[None, :] - xi)
        if circumference > 0:
            d = np.mod(d, circumference)
            d = np.minimum(d, circumference - d)
        z = vals[None, :] - vals[s:s + chunk, None] - d
        rows = np.arange(s, min(s + chunk, n))
        z[rows - s, rows] = -np.inf
        k = int(np.argmax(z))
        if z.flat[k] > best:
            best = float(z.flat[k])
            bi, bj = s + k // n, k % n
    return best, bi, bj


def _torus_dist_np(delta, periods, norm_code, p, A):
    delta = delta - periods * np.round(delta / periods)
    if norm_code == 0:
        if p == 2.0:
            return np.sqrt(np.sum(delta * delta, axis=-1))
        return np.sum(np.abs(delta) ** p, axis=-1) ** (1.0 / p)
    best = None
    dim = delta.shape[-1]
    shifts = np.array(np.meshgrid(*([[-1.0, 0.0, 1.0]] * dim), indexing="ij")).reshape(dim, -1).T
    for k in shifts:
        w = delta + k * periods
        d = np.sqrt(np.einsum("...i,ij,...j->...", w, A, w))
        best = d if best is None else np.minimum(best, d)
    return best


def pair_max_torus_np(coords, vals, periods, norm_code, p, A, chunk=256):
    """Torus pair scan; ``norm_code`` 0 is an ``l^p`` distance, 1 a quadratic form ``A``."""
    n = coords.shape[0]
    best, bi, bj = -np.inf, -1, -1
    for s in range(0, n, chunk):
        delta = coords[None, :, :] - coords[s:s + chunk, None, :]
        d = _torus_dist_np(delta, periods, norm_code, p, A)
        z = vals[None, :] - vals[s:s + chunk, None] - d
        rows = np.arange(s, min(s + chunk, n))
        z[rows - s, rows] = -np.inf
        k = int(np.argmax(z))
        if z.flat[k] > best:
            best = float(z.flat[k])
            bi, bj = s + k // n, k % n
    return best, bi, bj


# --- numba path ---------------------------------------------------------------


@njit(cache=True)
def face_gradients_nb(u, hx, hy):
    nx, ny = u.shape
    xi_x = np.empty_like(u)
    xi_y = np.empty_like(u)
    eta_x = np.empty_like(u)
    eta_y = np.empty_like(u)
    for i in range(nx):
        ip = (i + 1) % nx
        im = (i - 1) % nx
        for j in range(ny):
            jp = (j + 1) % ny
            jm = (j - 1) % ny
            xi_x[i, j] = (u[ip, j] - u[i, j]) / hx
            xi_y[i, j] = (u[i, jp] - u[i, jm] + u[ip, jp] - u[ip, jm]) / (4.0 * hy)
            eta_y[i, j] = (u[i, jp] - u[i, j]) / hy
            eta_x[i, j] = (u[ip, j] - u[im, j] + u[ip, jp] - u[im, jp]) / (4.0 * hx)
    return xi_x, xi_y, eta_x, eta_y


@njit(cache=True)
def divergence_nb(fx, fy, hx, hy):
    nx, ny = fx.shape
    out = np.empty_like(fx)
    for i in range(nx):
        im = (i - 1) % nx
        for j in range(ny):
            jm = (j - 1) % ny
            out[i, j] = (fx[i, j] - fx[im, j]) / hx + (fy[i, j] - fy[i, jm]) / hy
    return out


@njit(cache=True)
def gradient4_nb(u, hx, hy):
    nx, ny = u.shape
    gx = np.empty_like(u)
    gy = np.empty_like(u)
    for i in range(nx):
        i1, i2 = (i + 1) % nx, (i + 2) % nx
        m1, m2 = (i - 1) % nx, (i - 2) % nx
        for j in range(ny):
            j1, j2 = (j + 1) % ny, (j + 2) % ny
            n1, n2 = (j - 1) % ny, (j - 2) % ny
            gx[i, j] = (8.0 * (u[i1, j] - u[m1, j]) - (u[i2, j] - u[m2, j])) / (12.0 * hx)
            gy[i, j] = (8.0 * (u[i, j1] - u[i, n1]) - (u[i, j2] - u[i, n2])) / (12.0 * hy)
    return gx, gy


@njit(cache=True)
def pair_max_1d_nb(coords, vals, circumference):
    n = coords.shape[0]
    best = -np.inf
    bi = -1
    bj = -1
    for i in range(n):
        xi = coords[i]
        vi = vals[i]
        for j in range(n):
            if i == j:
                continue
            d = abs(coords[j] - xi)
            if circumference > 0.0:
                d = d % circumference
                if circumference - d < d:
                    d = circumference - d
            z = vals[j] - vi - d
            if z > best:
                best = z
                bi = i
                bj = j
    return best, bi, bj


@njit(cache=True)
def pair_max_torus_nb(coords, vals, periods, norm_code, p, A):
    n, dim = coords.shape
    best = -np.inf
    bi = -1
    bj = -1
    delta = np.empty(dim)
    w = np.empty(dim)
    nshift = 3 ** dim
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            for k in range(dim):
                t = coords[j, k] - coords[i, k]
                delta[k] = t - periods[k] * np.round(t / periods[k])
            if norm_code == 0:
                acc = 0.0
                if p == 2.0:
                    for k in range(dim):
                        acc += delta[k] * delta[k]
                    d = np.sqrt(acc)
                else:
                    for k in range(dim):
                        acc += abs(delta[k]) ** p
                    d = acc ** (1.0 / p)
            else:
                d = np.inf
                for s in range(nshift):
                    code = s
                    for k in range(dim):
                        w[k] = delta[k] + ((code % 3) - 1) * periods[k]
                        code //= 3
                    acc = 0.0
                    for a in range(dim):
                        for b in range(dim):
                            acc += w[a] * A[a, b] * w[b]
                    dd = np.sqrt(acc)
                    if dd < d:
                        d = dd
            z = vals[j] - vals[i] - d
            if z > best:
                best = z
                bi = i
                bj = j
    return best, bi, bj


# --- dispatch -----------------------------------------------------------------


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def face_gradients(u, hx, hy):
    if NUMBA_ENABLED:
        return face_gradients_nb(_f64(u), float(hx), float(hy))
    return face_gradients_np(u, hx, hy)


def divergence(fx, fy, hx, hy):
    if NUMBA_ENABLED:
        return divergence_nb(_f64(fx), _f64(fy), float(hx), float(hy))
    return divergence_np(fx, fy, hx, hy)


def gradient4(u, hx, hy):
    if NUMBA_ENABLED:
        return gradient4_nb(_f64(u), float(hx), float(hy))
    return gradient4_np(u, hx, hy)


def pair_max_1d(coords, vals, circumference=0.0):
    if NUMBA_ENABLED:
        b, i, j = pair_max_1d_nb(_f64(coords), _f64(vals), float(circumference))
        return float(b), int(i), int(j)
    return pair_max_1d_np(_f64(coords), _f64(vals), float(circumference))


def pair_max_torus(coords, vals, periods, norm_code=0, p=2.0, A=None):
    coords = _f64(coords)
    dim = coords.shape[1]
    A = _f64(np.eye(dim) if A is None else A)
    periods = _f64(periods)
    if NUMBA_ENABLED:
        b, i, j = pair_max_torus_nb(coords, _f64(vals), periods, int(norm_code), float(p), A)
        return float(b), int(i), int(j)
    return pair_max_torus_np(coords, _f64(vals), periods, int(norm_code), float(p), A)

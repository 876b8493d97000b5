"""
Compiled inner loops.

Every parallel loop runs over an output index and each output entry is
accumulated by one thread in a fixed order, so results do not depend on the
thread count.
"""

import math
import threading

import numba
import numpy as np


# numba's default threading layer does not accept concurrent parallel launches
KERNEL_LOCK = threading.Lock()


def set_threads(threads: int | None) -> None:
    if threads is not None:
        numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))


#####################
### Cauchy kernel ###
#####################


@numba.njit(cache=True)
def cauchy_primitive(x: float, y: float) -> complex:
    """
    P(x, y) with d^2 P / dx dy = 1 / (x + iy).

    Re P = x atan(y/x) + (y/2) log(x^2 + y^2), Im P = -(y atan(x/y) + (x/2) log(x^2 + y^2)),
    continuous everywhere; this is -i (zeta Log zeta - zeta) up to terms that
    depend on x alone or y alone.
    """
    r2 = x * x + y * y
    if r2 == 0.0:
        return 0j
    lg = math.log(r2)
    re = 0.5 * y * lg
    im = 0.5 * x * lg
    if x != 0.0:
        re += x * math.atan(y / x)
    if y != 0.0:
        im += y * math.atan(x / y)
    return complex(re, -im)


@numba.njit(parallel=True, cache=True)
def corner_sum(targets, corners, weights, out):
    """out[m] = sum_c P(corners[c] - targets[m]) * weights[c]"""
    for m in numba.prange(targets.shape[0]):
        t = targets[m]
        acc = 0j
        for c in range(corners.shape[0]):
            d = corners[c] - t
            acc += cauchy_primitive(d.real, d.imag) * weights[c]
        out[m] = acc


@numba.njit(parallel=True, cache=True)
def primitive_lattice(xs, ys, out):
    """out[j, k] = P(xs[k], ys[j])"""
    for j in numba.prange(ys.shape[0]):
        for k in range(xs.shape[0]):
            out[j, k] = cauchy_primitive(xs[k], ys[j])


##########################
### Whitney pair scans ###
##########################


@numba.njit(cache=True)
def _remainder_update(i, j, points, values, holo, anti, scales, best, counts):
    dz = points[i] - points[j]
    d = abs(dz)
    if d > scales[scales.shape[0] - 1]:
        return
    k = 0
    while scales[k] < d:
        k += 1
    r = abs(values[i] - values[j] - holo[j] * dz - anti[j] * dz.conjugate()) / d
    if r > best[i, k]:
        best[i, k] = r
    counts[i, k] += 1


@numba.njit(parallel=True, cache=True)
def remainder_scan_all(points, values, holo, anti, scales, best, counts):
    """Bucketed max of |f_i - f_j - df_j(z_i - z_j)| / |z_i - z_j| over all j != i."""
    n = points.shape[0]
    for i in numba.prange(n):
        for j in range(n):
            if j != i:
                _remainder_update(i, j, points, values, holo, anti, scales, best, counts)


@numba.njit(parallel=True, cache=True)
def remainder_scan_csr(points, values, holo, anti, scales, indptr, indices, best, counts):
    """Same scan restricted to candidate neighbors (CSR lists, ascending j)."""
    for i in numba.prange(points.shape[0]):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j != i:
                _remainder_update(i, j, points, values, holo, anti, scales, best, counts)


def empty_scan(n: int, s: int) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros((n, s)), np.zeros((n, s), dtype=np.int64)

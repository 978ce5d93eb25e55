"""Spherical and Riccati-Bessel functions of real argument.

j_l comes from Miller's downward recurrence normalised against the closed
forms of j_0 and j_1; y_l from upward recurrence, which is stable for the
irregular solution. Both are numba kernels because the radial solver calls
them once per partial wave.
"""

import math

import numpy as np
from numba import njit

_RESCALE = 1e250


@njit(cache=True, error_model="numpy")
def _top_order(l, x):
    m = max(float(l), x)
    return int(m + 30.0 + math.sqrt(40.0 * m))


@njit(cache=True, error_model="numpy")
def _j_normalisation(x, j0, j1):
    e0 = math.sin(x) / x
    e1 = math.sin(x) / (x * x) - math.cos(x) / x
    s = max(abs(j0), abs(j1))
    a0 = j0 / s
    a1 = j1 / s
    return (e0 * a0 + e1 * a1) / (a0 * a0 + a1 * a1) / s


@njit(cache=True, error_model="numpy")
def sph_jn_scalar(l, x):
    """j_l(x) for a single order and argument."""
    if x == 0.0:
        return 1.0 if l == 0 else 0.0
    top = _top_order(l, x)
    jp1 = 0.0
    j = 1.0
    rec = 0.0
    for n in range(top, 0, -1):
        jm1 = (2 * n + 1) / x * j - jp1
        jp1 = j
        j = jm1
        if n - 1 == l:
            rec = j
        if abs(j) > _RESCALE:
            j /= _RESCALE
            jp1 /= _RESCALE
            rec /= _RESCALE
    if l == 0:
        rec = j
    return rec * _j_normalisation(x, j, jp1)


@njit(cache=True, error_model="numpy")
def sph_yn_scalar(l, x):
    """y_l(x) for a single order and argument (x > 0)."""
    y0 = -math.cos(x) / x
    if l == 0:
        return y0
    y1 = -math.cos(x) / (x * x) - math.sin(x) / x
    for n in range(1, l):
        y2 = (2 * n + 1) / x * y1 - y0
        y0 = y1
        y1 = y2
    return y1


@njit(cache=True, error_model="numpy")
def sph_jn_all(lmax, x):
    """Array [j_0(x), ..., j_lmax(x)]."""
    out = np.zeros(lmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    top = max(_top_order(lmax, x), lmax + 1)
    jp1 = 0.0
    j = 1.0
    for n in range(top, 0, -1):
        jm1 = (2 * n + 1) / x * j - jp1
        jp1 = j
        j = jm1
        if n - 1 <= lmax:
            out[n - 1] = j
        if abs(j) > _RESCALE:
            j /= _RESCALE
            jp1 /= _RESCALE
            for m in range(n - 1, min(lmax, top) + 1):
                out[m] /= _RESCALE
    return out * _j_normalisation(x, j, jp1)


@njit(cache=True, error_model="numpy")
def sph_yn_all(lmax, x):
    """Array [y_0(x), ..., y_lmax(x)]; overflows to -inf deep in the forbidden region."""
    out = np.empty(lmax + 1)
    out[0] = -math.cos(x) / x
    if lmax >= 1:
        out[1] = -math.cos(x) / (x * x) - math.sin(x) / x
    for n in range(1, lmax):
        out[n + 1] = (2 * n + 1) / x * out[n] - out[n - 1]
    return out


def spherical_jn(l, x):
    """Vectorised j_l(x) over broadcast arrays of orders and arguments."""
    l_arr, x_arr = np.broadcast_arrays(np.asarray(l, dtype=np.int64), np.asarray(x, dtype=float))
    out = np.array([sph_jn_scalar(int(li), float(xi)) for li, xi in zip(l_arr.ravel(), x_arr.ravel())])
    return out.reshape(l_arr.shape) if l_arr.ndim else float(out[0])


def spherical_yn(l, x):
    """Vectorised y_l(x) over broadcast arrays of orders and arguments."""
    l_arr, x_arr = np.broadcast_arrays(np.asarray(l, dtype=np.int64), np.asarray(x, dtype=float))
    out = np.array([sph_yn_scalar(int(li), float(xi)) for li, xi in zip(l_arr.ravel(), x_arr.ravel())])
    return out.reshape(l_arr.shape) if l_arr.ndim else float(out[0])


def riccati_jy(lmax, x):
    """Riccati-Bessel x j_l(x) and x y_l(x) for l = 0..lmax at one argument."""
    return x * sph_jn_all(lmax, x), x * sph_yn_all(lmax, x)

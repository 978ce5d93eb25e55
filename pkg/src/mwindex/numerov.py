"""Fixed-step Numerov integration of the radial Schroedinger equation.

The recurrence is run in ratio form, rho_n = w_n / w_{n-1} with
w = (1 + h^2 Q / 12) u, so nothing overflows in classically forbidden
regions. Every partial wave is integrated twice on the same grid: once
with the potential and once without. The free run is started from the
exact Riccati-Bessel function, so its extracted phase is the pure Numerov
dispersion error, and subtracting it removes most of the error that builds
up while the wave crosses the long, nearly free outer region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bessel import sph_jn_scalar, sph_jn_all, sph_yn_all
from .errors import SolverError
from .potentials import wrap_phase

# smallest admissible 1 + h^2 Q / 12 at a lane's starting node
F_MIN = 0.5
# WKB decay (in e-folds of the amplitude) wanted between start and turning point
DECAY_TARGET = 18.0
DECAY_MIN = 12.0
# start no deeper than V_eff - E = SPEC_DEPTH * E
SPEC_DEPTH = 1.0e3


@njit(cache=True, error_model="numpy")
def _start_index(U, r, h, k2, ll, origin_regular):
    """Starting node for one partial wave and the WKB decay it leaves.

    Walks inward from the first classically allowed node, summing kappa*h,
    until the decay reaches DECAY_TARGET, the effective potential reaches
    SPEC_DEPTH times the collision energy, or the step becomes too coarse
    for Numerov (1 + h^2 Q/12 < F_MIN).
    """
    n0 = 1 if r[0] == 0.0 else 0
    N = r.shape[0]
    h12 = h * h / 12.0
    t = N - 1
    for n in range(n0, N):
        Q = k2 - U[n] - ll / (r[n] * r[n])
        if Q >= 0.0:
            t = n
            break
    if t == n0:
        return n0, math.inf
    decay = 0.0
    n = t - 1
    while n >= n0:
        Q = k2 - U[n] - ll / (r[n] * r[n])
        if 1.0 + h12 * Q < F_MIN:
            if origin_regular:
                # power-law start: the irregular admixture dies off as (r/r_t)^(2l+1)
                return n + 1, math.inf
            return n + 1, decay
        if Q < 0.0:
            decay += math.sqrt(-Q) * h
        if decay >= DECAY_TARGET or -Q >= SPEC_DEPTH * k2:
            return n, math.inf
        n -= 1
    if origin_regular:
        return n0, math.inf
    return n0, decay


@njit(cache=True, error_model="numpy")
def _wkb_ratio(U, r, h, k2, ll, s):
    """w_s / w_{s-1} for a solution growing outward in a forbidden region."""
    h12 = h * h / 12.0
    Qa = k2 - U[s - 1] - ll / (r[s - 1] * r[s - 1])
    Qb = k2 - U[s] - ll / (r[s] * r[s])
    ka = math.sqrt(max(-Qa, 0.0))
    kb = math.sqrt(max(-Qb, 0.0))
    if ka > 0.0 and kb > 0.0:
        psi = math.exp(0.5 * h * (ka + kb)) * math.sqrt(ka / kb)
    else:
        psi = math.exp(0.5 * h * (ka + kb))
    return psi * (1.0 + h12 * Qb) / (1.0 + h12 * Qa)


@njit(cache=True, error_model="numpy")
def _regular_ratio(U, r, h, k2, ll, l, s):
    """w_s / w_{s-1} for the regular solution of a constant potential U[1] near the origin.

    u = r j_l(K r) with K^2 = k^2 - U for large K r, otherwise the power series
    r^(l+1) sum_n a_n r^(2n), a_n = -K^2 a_{n-1} / (2n (2l+2n+1)).
    """
    h12 = h * h / 12.0
    q0 = k2 - U[1]
    ua = 0.0
    ub = 0.0
    if q0 > 0.0 and q0 * r[s] * r[s] > 2.0 * (2.0 * l + 3.0):
        K = math.sqrt(q0)
        ua = r[s - 1] * sph_jn_scalar(l, K * r[s - 1])
        ub = r[s] * sph_jn_scalar(l, K * r[s])
        ratio = ub / ua
    else:
        sa = 1.0
        sb = 1.0
        ta = 1.0
        tb = 1.0
        for n in range(1, 400):
            c = -q0 / (2.0 * n * (2.0 * l + 2.0 * n + 1.0))
            ta *= c * r[s - 1] * r[s - 1]
            tb *= c * r[s] * r[s]
            sa += ta
            sb += tb
            if abs(tb) < 1e-17 * abs(sb) and abs(ta) < 1e-17 * abs(sa):
                break
        ratio = (r[s] / r[s - 1]) ** (l + 1) * sb / sa
    Qa = k2 - U[s - 1] - ll / (r[s - 1] * r[s - 1])
    Qb = k2 - U[s] - ll / (r[s] * r[s])
    return ratio * (1.0 + h12 * Qb) / (1.0 + h12 * Qa)


@njit(cache=True, error_model="numpy")
def _propagate(U, r, h, k2, ll, s, rho, i1, i2):
    """Return u(r_i2) / u(r_i1) starting from rho = w_s / w_{s-1}."""
    h12 = h * h / 12.0
    prod = 1.0
    for n in range(s, i2):
        Q = k2 - U[n] - ll / (r[n] * r[n])
        F = 1.0 + h12 * Q
        rho = (12.0 - 10.0 * F) / F - 1.0 / rho
        if n + 1 > i1:
            prod *= rho
    Q1 = k2 - U[i1] - ll / (r[i1] * r[i1])
    Q2 = k2 - U[i2] - ll / (r[i2] * r[i2])
    return prod * (1.0 + h12 * Q1) / (1.0 + h12 * Q2)


@njit(cache=True, error_model="numpy")
def _solve_block(U, r, h, k, l_lo, l_hi, i1, i2, origin_regular, i_const,
                 out_ratio, out_free, out_decay, out_start):
    k2 = k * k
    zeros = np.zeros_like(U)
    for idx in range(l_hi - l_lo + 1):
        l = l_lo + idx
        ll = float(l * (l + 1))
        if origin_regular:
            # a few nodes out, where h^2 l(l+1) / r^2 is small, but still
            # inside the region of constant potential where the start is exact
            s = max(2, int(math.ceil(3.0 * math.sqrt(ll))))
            s = min(s, max(2, i_const))
            decay = math.inf
            if l == 0:
                s = 1
                rho = math.inf
                rho_free = math.inf
            else:
                rho = _regular_ratio(U, r, h, k2, ll, l, s)
                rho_free = _regular_ratio(zeros, r, h, k2, ll, l, s)
        else:
            s, decay = _start_index(U, r, h, k2, ll, origin_regular)
            rho = _wkb_ratio(U, r, h, k2, ll, s)
            ja = sph_jn_scalar(l, k * r[s - 1])
            jb = sph_jn_scalar(l, k * r[s])
            if abs(ja) > 1e-250 and abs(jb) > 1e-250:
                ff = 1.0 + h * h / 12.0 * (k2 - ll / (r[s] * r[s]))
                fa = 1.0 + h * h / 12.0 * (k2 - ll / (r[s - 1] * r[s - 1]))
                rho_free = (r[s] * jb * ff) / (r[s - 1] * ja * fa)
            else:
                rho_free = _wkb_ratio(zeros, r, h, k2, ll, s)
        out_start[idx] = s
        out_decay[idx] = decay
        out_ratio[idx] = _propagate(U, r, h, k2, ll, s, rho, i1, i2)
        out_free[idx] = _propagate(zeros, r, h, k2, ll, s, rho_free, i1, i2)


def _tan_from_ratio(ratio, jh1, jh2, yh1, yh2):
    # u = A (jhat - tan(delta) yhat); u1 = 1, u2 = ratio
    num = ratio * jh1 - jh2
    den = ratio * yh1 - yh2
    return np.arctan2(num * np.sign(den), np.abs(den))


@dataclass
class RadialGrid:
    """Uniform grid r_n = r0 + n h with reduced potential U = 2 mu V / hbar^2."""

    r0: float
    h: float
    reduced_potential: object  # callable r -> U(r), 1/m^2
    origin_regular: bool
    # for origin_regular grids: U is constant on (0, constant_until)
    constant_until: float = 0.0

    def nodes(self, n_max):
        r = self.r0 + self.h * np.arange(n_max + 1, dtype=float)
        if self.r0 == 0.0:
            U = np.empty_like(r)
            U[0] = 0.0
            U[1:] = self.reduced_potential(r[1:])
        else:
            U = self.reduced_potential(r)
        return r, U

    def index(self, radius):
        return int(math.ceil((radius - self.r0) / self.h))


def solve_partial_waves(grid: RadialGrid, k: float, l_lo: int, l_hi: int, r_match: float, match_sep: float):
    """Phase shifts for l_lo..l_hi matched at r_match and r_match + match_sep.

    Returns (delta, diagnostics). Raises SolverError when a lane could not be
    started deep enough in its forbidden region.
    """
    i1 = max(grid.index(r_match), 2)
    i2 = i1 + max(4, int(round(match_sep / grid.h)))
    r, U = grid.nodes(i2)
    n = l_hi - l_lo + 1
    ratio = np.empty(n)
    free = np.empty(n)
    decay = np.empty(n)
    start = np.empty(n, dtype=np.int64)
    with np.errstate(all="ignore"):
        i_const = int(math.floor(grid.constant_until / grid.h - 1e-9))
        _solve_block(U, r, grid.h, k, l_lo, l_hi, i1, i2, grid.origin_regular, i_const, ratio, free, decay, start)
    bad = decay < DECAY_MIN
    if np.any(bad):
        l_bad = int(l_lo + np.argmax(bad))
        raise SolverError(
            "radial start not deep enough in the forbidden region; refine the step",
            l=l_bad, decay=float(decay[bad][0]), step=grid.h,
        )
    x1, x2 = k * r[i1], k * r[i2]
    jh1, yh1 = x1 * sph_jn_all(l_hi, x1)[l_lo:], x1 * sph_yn_all(l_hi, x1)[l_lo:]
    jh2, yh2 = x2 * sph_jn_all(l_hi, x2)[l_lo:], x2 * sph_yn_all(l_hi, x2)[l_lo:]
    with np.errstate(all="ignore"):
        d_int = _tan_from_ratio(ratio, jh1, jh2, yh1, yh2)
        d_free = _tan_from_ratio(free, jh1, jh2, yh1, yh2)
    # lanes still deep under the centrifugal barrier at the matching radius:
    # y_l overflows and the phase shift (~ x^(2l+1)) is zero in double precision
    buried = ~(np.abs(yh1) < 1e290) | ~(np.abs(yh2) < 1e290)
    d_int[buried] = 0.0
    d_free[buried] = 0.0
    if not (np.all(np.isfinite(d_int)) and np.all(np.isfinite(d_free))):
        raise SolverError("non-finite matching result", l_lo=l_lo, l_hi=l_hi, r_match=r_match)
    delta = wrap_phase(d_int - d_free)
    diag = {
        "steps": int(i2 - start.min()),
        "step": grid.h,
        "r_match": float(r[i1]),
        "free_residual": float(np.max(np.abs(d_free))),
    }
    return delta, diag

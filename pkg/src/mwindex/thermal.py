"""Target velocity distributions and thermal averages over them.

For an isotropic Maxwell-Boltzmann gas the 3-D average over target
velocities reduces to a 1-D integral over the relative speed v_r with the
density

    P(v_r) = v_r / (sqrt(pi) alpha v_p)
             * [exp(-(v_p - v_r)^2 / alpha^2) - exp(-(v_p + v_r)^2 / alpha^2)],

with alpha = sqrt(2 k_B T / m_t). The bracket is evaluated as
exp(-(v_p - v_r)^2/alpha^2) * (-expm1(-4 v_p v_r / alpha^2)), which neither
overflows nor cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .constants import K_B
from .errors import DomainError, QuadratureError

WINDOW_SIGMAS = 8.0
SQRT_PI = math.sqrt(math.pi)


def thermal_speed(T: float, m_t: float) -> float:
    """alpha = sqrt(2 k_B T / m_t), the most probable target speed."""
    if not (T > 0 and m_t > 0):
        raise DomainError(f"need T > 0 and m_t > 0, got T={T!r}, m_t={m_t!r}")
    return math.sqrt(2.0 * K_B * T / m_t)


@dataclass(frozen=True)
class MaxwellBoltzmann:
    """Isotropic thermal gas at temperature T (K) of particles of mass m_t (kg)."""

    T: float
    m_t: float
    alpha: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", thermal_speed(self.T, self.m_t))


@dataclass(frozen=True)
class DeltaRest:
    """All targets at rest."""


@dataclass(frozen=True)
class DriftingMB:
    """Maxwell-Boltzmann gas moving with a mean velocity ``drift`` (m/s, 3-vector)."""

    T: float
    m_t: float
    drift: tuple = (0.0, 0.0, 0.0)
    alpha: float = field(init=False)

    def __post_init__(self):
        d = tuple(float(x) for x in self.drift)
        if len(d) != 3:
            raise DomainError("drift must be a 3-vector")
        object.__setattr__(self, "drift", d)
        object.__setattr__(self, "alpha", thermal_speed(self.T, self.m_t))


@dataclass(frozen=True)
class Custom:
    """User-supplied target distribution.

    ``sampler(rng, n)`` returns an (n, 3) array of target velocities;
    ``density(v)`` (optional) evaluates the 3-D density at an (..., 3) array.
    Averages over a Custom distribution are Monte Carlo estimates drawn with
    ``n_samples`` samples from ``numpy.random.default_rng(seed)``.
    """

    sampler: Callable
    density: Callable | None = None
    n_samples: int = 200_000
    seed: int = 0


VelocityDistribution = Union[MaxwellBoltzmann, DeltaRest, DriftingMB, Custom]


def maxwell_density(v_t, alpha: float):
    """3-D Maxwell-Boltzmann density exp(-v^2/alpha^2) / (pi^{3/2} alpha^3)."""
    v = np.asarray(v_t, dtype=float)
    return np.exp(-np.sum(v * v, axis=-1) / alpha**2) / (math.pi**1.5 * alpha**3)


def velocity_density(dist: VelocityDistribution, v_t):
    """Density of a distribution at target velocities v_t (shape (..., 3))."""
    v = np.asarray(v_t, dtype=float)
    if isinstance(dist, MaxwellBoltzmann):
        return maxwell_density(v, dist.alpha)
    if isinstance(dist, DriftingMB):
        return maxwell_density(v - np.asarray(dist.drift), dist.alpha)
    if isinstance(dist, Custom) and dist.density is not None:
        return np.asarray(dist.density(v), dtype=float)
    raise DomainError(f"{type(dist).__name__} has no density function")


def relative_speed_pdf(v_r, v_p: float, alpha: float):
    """Probability density of the relative speed for a thermal target gas.

    At v_p = 0 the Maxwell-Boltzmann speed law
    4 v_r^2 / (sqrt(pi) alpha^3) exp(-v_r^2 / alpha^2) is returned.
    """
    if not (alpha > 0):
        raise DomainError(f"alpha must be > 0, got {alpha!r}")
    if not (v_p >= 0):
        raise DomainError(f"v_p must be >= 0, got {v_p!r}")
    v = np.asarray(v_r, dtype=float)
    if np.any(v < 0):
        raise DomainError("v_r must be >= 0")
    if v_p == 0:
        out = 4.0 * v * v / (SQRT_PI * alpha**3) * np.exp(-((v / alpha) ** 2))
    else:
        gauss = np.exp(-(((v_p - v) / alpha) ** 2))
        x = 4.0 * v_p * v / alpha**2
        # (1 - exp(-x)) / v_p, with the series branch keeping tiny v_p finite
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(x < 1e-8, 4.0 * v / alpha**2 * (1.0 - 0.5 * x), -np.expm1(-x) / v_p)
        out = v / (SQRT_PI * alpha) * gauss * ratio
    return out if np.ndim(v_r) else float(out)


def mean_relative_speed(v_p: float, alpha: float) -> float:
    """Closed-form first moment of the relative-speed law."""
    if v_p == 0:
        return 2.0 * alpha / SQRT_PI
    x = v_p / alpha
    return alpha * ((x + 0.5 / x) * math.erf(x) + math.exp(-x * x) / SQRT_PI)


def langevin(b):
    """coth(b) - 1/b, the mean cosine of a von Mises-Fisher direction."""
    b = np.asarray(b, dtype=float)
    small = np.abs(b) < 1e-3
    bs = np.where(small, 1.0, b)
    with np.errstate(over="ignore"):
        big = 1.0 / np.tanh(bs) - 1.0 / bs
    out = np.where(small, b / 3.0 - b**3 / 45.0, big)
    return out if out.ndim else float(out)


def relative_speed_window(v_p: float, alpha: float, sigmas: float = WINDOW_SIGMAS):
    """Support of the relative-speed law kept by the quadrature."""
    return max(0.0, v_p - sigmas * alpha), v_p + sigmas * alpha


def _effective_frame(dist, v_p):
    """(|V|, cos of V with the beam axis, alpha) for the thermal families.

    A drifting gas is handled in its rest frame, where the projectile moves
    with V = v_p z - drift.
    """
    if isinstance(dist, MaxwellBoltzmann):
        return v_p, 1.0, dist.alpha
    u = np.asarray(dist.drift)
    V = np.array([-u[0], -u[1], v_p - u[2]])
    speed = float(np.linalg.norm(V))
    return speed, (V[2] / speed if speed > 0 else 0.0), dist.alpha


def _quad(fun, a, b, points, rtol, atol, limit):
    res, err, info = integrate.quad(
        fun, a, b, epsabs=atol, epsrel=rtol, limit=limit, points=points, full_output=1
    )[:3]
    tol = max(atol, rtol * abs(res))
    if not math.isfinite(res) or err > 10.0 * tol:
        raise QuadratureError(
            f"relative-speed quadrature did not converge after {info.get('neval', '?')} evaluations",
            estimate=res,
            error=err,
        )
    return res, err


def average_over_targets(
    g: Callable,
    dist: VelocityDistribution,
    v_p: float,
    *,
    directional: bool = False,
    rtol: float = 1e-8,
    atol: float = 1e-30,
    window_sigmas: float = WINDOW_SIGMAS,
    limit: int = 400,
    full_output: bool = False,
):
    """Average g(v_r) over the target distribution for a projectile at speed v_p.

    Parameters
    ----------
    g : callable
        Function of the relative speed, real or complex valued.
    dist : VelocityDistribution
    v_p : float
        Projectile speed along the beam axis z (m/s).
    directional : bool
        Weight each encounter by the cosine between the relative velocity
        and z, i.e. average g(v_r) * cos(theta_r). For thermal gases the
        cosine is integrated out analytically (a Langevin function of
        2 |V| v_r / alpha^2).
    rtol, atol : float
        Tolerances of the adaptive Gauss-Kronrod quadrature.
    full_output : bool
        Also return an absolute error estimate (quadrature or Monte Carlo).

    Returns
    -------
    value or (value, error)
    """
    if not (v_p >= 0) or not math.isfinite(v_p):
        raise DomainError(f"v_p must be finite and >= 0, got {v_p!r}")

    if isinstance(dist, DeltaRest):
        value = g(v_p)
        return (value, 0.0) if full_output else value

    if isinstance(dist, Custom):
        return _custom_average(g, dist, v_p, directional, full_output)

    if not isinstance(dist, (MaxwellBoltzmann, DriftingMB)):
        raise DomainError(f"unsupported distribution {type(dist).__name__}")

    V, cos_axis, alpha = _effective_frame(dist, v_p)
    cache = {}

    def weighted(v):
        val = cache.get(v)
        if val is None:
            val = g(v) * relative_speed_pdf(v, V, alpha)
            if directional:
                val = val * cos_axis * langevin(2.0 * V * v / alpha**2)
            cache[v] = val
        return val

    lo, hi = relative_speed_window(V, alpha, window_sigmas)
    points = [V] if lo < V < hi else None
    probe = weighted(0.5 * (lo + hi) if points is None else V)
    re, e_re = _quad(lambda v: float(np.real(weighted(v))), lo, hi, points, rtol, atol, limit)
    if np.iscomplexobj(probe):
        im, e_im = _quad(lambda v: float(np.imag(weighted(v))), lo, hi, points, rtol, atol, limit)
        value, err = complex(re, im), math.hypot(e_re, e_im)
    else:
        value, err = re, e_re
    return (value, err) if full_output else value


def _custom_average(g, dist: Custom, v_p, directional, full_output):
    rng = np.random.default_rng(dist.seed)
    v_t = np.asarray(dist.sampler(rng, dist.n_samples), dtype=float)
    rel = np.array([0.0, 0.0, v_p]) - v_t
    v_r = np.linalg.norm(rel, axis=1)
    vals = np.asarray(g(v_r))
    if directional:
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = vals * np.where(v_r > 0, rel[:, 2] / v_r, 0.0)
    mean = vals.mean()
    err = float(np.std(vals, ddof=1) / math.sqrt(vals.size))
    value = complex(mean) if np.iscomplexobj(vals) else float(mean)
    return (value, err) if full_output else value


def effective_cross_section(sigma: Callable, dist: VelocityDistribution, v_p: float, **kwargs):
    """Thermal effective cross section <sigma(v_r) v_r> / v_p (m^2)."""
    if not (v_p > 0):
        raise DomainError(f"v_p must be > 0, got {v_p!r}")
    full = kwargs.get("full_output", False)
    out = average_over_targets(lambda v: sigma(v) * v, dist, v_p, **kwargs)
    if full:
        return out[0] / v_p, out[1] / v_p
    return out / v_p


def forrey_effective_cross_section(sigma: Callable, dist: VelocityDistribution, v_p: float, **kwargs):
    """Unweighted average <sigma(v_r)>, kept for comparison with the flux-weighted form."""
    if not (v_p > 0):
        raise DomainError(f"v_p must be > 0, got {v_p!r}")
    return average_over_targets(sigma, dist, v_p, **kwargs)


def normalization(v_p: float, alpha: float, rtol: float = 1e-12) -> float:
    """Integral of the relative-speed density over its window."""
    lo, hi = relative_speed_window(v_p, alpha)
    points = [v_p] if lo < v_p < hi else None
    res, _ = _quad(lambda v: relative_speed_pdf(v, v_p, alpha), lo, hi, points, rtol, 0.0, 400)
    return res

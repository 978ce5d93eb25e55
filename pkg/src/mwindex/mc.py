"""Monte Carlo oracle for thermal averages and slab transmission.

Target velocities are drawn in 3-D and the relative speed is formed
explicitly, so these estimators do not rely on the 1-D relative-speed
reduction used by :mod:`mwindex.thermal`. Samples are produced in fixed-size
blocks; block ``i`` draws from its own PCG64 stream spawned from the config
seed, and block statistics are merged with the pairwise (Chan) update, so a
result depends only on ``(seed, n_samples, block_size)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import thermal
from .constants import CollisionSystem
from .errors import DomainError
from .scattering import TabulatedAmplitude, amplitude_model, cross_section_from_amplitude
from .thermal import Custom, DeltaRest, DriftingMB, MaxwellBoltzmann, VelocityDistribution

BLOCK_SIZE = 1 << 16
MIN_STATISTICAL_SAMPLES = 1000


@dataclass(frozen=True)
class McConfig:
    seed: int
    n_samples: int
    distribution: VelocityDistribution
    block_size: int = BLOCK_SIZE

    def __post_init__(self):
        if not (0 <= self.seed < 2**64):
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.n_samples <= 0:
            raise DomainError(f"n_samples must be > 0, got {self.n_samples!r}")
        if self.block_size <= 0:
            raise DomainError("block_size must be > 0")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error (sample std / sqrt(n))."""

    mean: float
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class _Moments:
    n: int
    mean: float
    m2: float

    @classmethod
    def of(cls, x):
        x = np.asarray(x, dtype=float).ravel()
        if x.size and np.all(x == x[0]):
            # constant samples; keep the spread exactly zero
            return cls(x.size, float(x[0]), 0.0)
        mean = float(x.mean())
        return cls(x.size, mean, float(np.sum((x - mean) ** 2)))

    def merge(self, other: "_Moments") -> "_Moments":
        if self.n == 0:
            return other
        n = self.n + other.n
        d = other.mean - self.mean
        mean = self.mean + d * other.n / n
        return _Moments(n, mean, self.m2 + other.m2 + d * d * self.n * other.n / n)

    def estimate(self) -> McEstimate:
        if self.n < 2:
            return McEstimate(self.mean, math.nan, self.n)
        var = self.m2 / (self.n - 1)
        return McEstimate(self.mean, math.sqrt(max(var, 0.0) / self.n), self.n)


def _block_sizes(n, block):
    full, rest = divmod(n, block)
    return [block] * full + ([rest] if rest else [])


def _streams(config: McConfig, n: int | None = None):
    sizes = _block_sizes(config.n_samples if n is None else n, config.block_size)
    children = np.random.SeedSequence(config.seed).spawn(len(sizes))
    return [(np.random.default_rng(child), size) for child, size in zip(children, sizes)]


def sample_target_velocity(config: McConfig, rng: np.random.Generator, size: int | None = None):
    """Draw target velocities (m/s); shape (3,) or (size, 3).

    Maxwell-Boltzmann components are independent normals with standard
    deviation alpha / sqrt(2).
    """
    n = 1 if size is None else size
    dist = config.distribution
    if isinstance(dist, DeltaRest):
        out = np.zeros((n, 3))
    elif isinstance(dist, MaxwellBoltzmann):
        out = rng.normal(0.0, dist.alpha / math.sqrt(2.0), size=(n, 3))
    elif isinstance(dist, DriftingMB):
        out = rng.normal(0.0, dist.alpha / math.sqrt(2.0), size=(n, 3)) + np.asarray(dist.drift)
    elif isinstance(dist, Custom):
        out = np.asarray(dist.sampler(rng, n), dtype=float).reshape(n, 3)
    else:
        raise DomainError(f"unsupported distribution {type(dist).__name__}")
    return out[0] if size is None else out


def relative_speeds(v_t, v_p: float):
    """|v_p z - v_t| for an (n, 3) array of target velocities."""
    rel = -np.asarray(v_t, dtype=float)
    rel[..., 2] += v_p
    return np.sqrt(np.sum(rel * rel, axis=-1))


def _run(config: McConfig, v_p: float, per_sample: Callable, n: int | None = None) -> McEstimate:
    acc = _Moments(0, 0.0, 0.0)
    for rng, size in _streams(config, n):
        v_r = relative_speeds(sample_target_velocity(config, rng, size), v_p)
        acc = acc.merge(_Moments.of(per_sample(v_r)))
    return acc.estimate()


def mc_relative_speed_moments(config: McConfig, v_p: float, order: int) -> McEstimate:
    """Estimate <v_r^order> by direct 3-D sampling."""
    if order not in (1, 2, 3, 4):
        raise DomainError(f"order must be 1..4, got {order!r}")
    if not (v_p >= 0):
        raise DomainError(f"v_p must be >= 0, got {v_p!r}")
    return _run(config, v_p, lambda v: v**order)


def mc_effective_cross_section(sigma: Callable, config: McConfig, v_p: float) -> McEstimate:
    """Estimate <sigma(v_r) v_r> / v_p; ``sigma`` must accept arrays."""
    if not (v_p > 0):
        raise DomainError(f"v_p must be > 0, got {v_p!r}")
    return _run(config, v_p, lambda v: np.asarray(sigma(v), dtype=float) * v / v_p)


def vectorized_cross_section(system: CollisionSystem, potential, dist: VelocityDistribution, v_p: float):
    """sigma(v_r) usable on large sample arrays.

    Scalar-only amplitudes are replaced by a Chebyshev table over the relative
    speeds the distribution can produce.
    """
    amp = amplitude_model(potential, system)
    if not amp.vectorized:
        if isinstance(dist, DeltaRest):
            lo = hi = v_p
        elif isinstance(dist, Custom):
            raise DomainError("pass sigma explicitly for Custom distributions")
        else:
            V, _, alpha = thermal._effective_frame(dist, v_p)
            lo, hi = thermal.relative_speed_window(V, alpha)
            lo = max(lo, 1e-3 * hi)
        if lo == hi:
            value = amp(system.k_relative(v_p))
            return lambda v: np.full(np.shape(v), 4.0 * math.pi * value.imag / system.k_relative(v_p))
        amp = TabulatedAmplitude(amp, system.k_relative(lo), system.k_relative(hi))
    return cross_section_from_amplitude(amp, system)


def mc_transmission(sample, system: CollisionSystem, v_p: float, L: float, config: McConfig, *,
                    sigma: Callable | None = None, encounters: int | None = None) -> McEstimate:
    """Slab transmission from simulated projectiles.

    Each projectile i meets ``encounters`` targets drawn from the config
    distribution; its expected collision count is
    Lambda_i = n_t L mean_j[sigma(v_r,j) v_r,j / v_p] and it survives with
    probability exp(-Lambda_i). The estimate is the mean survival over
    projectiles. By default n_samples is split into about sqrt(n_samples)
    projectiles with as many encounters each.
    """
    if not (v_p > 0):
        raise DomainError(f"v_p must be > 0, got {v_p!r}")
    if not (L >= 0):
        raise DomainError(f"L must be >= 0, got {L!r}")
    if L == 0:
        return McEstimate(1.0, 0.0, config.n_samples)
    if sigma is None:
        sigma = vectorized_cross_section(system, sample.potential, config.distribution, v_p)
    m = encounters or max(1, math.isqrt(config.n_samples))
    projectiles = max(1, config.n_samples // m)
    scale = sample.n_t * L / v_p

    acc = _Moments(0, 0.0, 0.0)
    per_block = max(1, config.block_size // m)
    n_blocks = -(-projectiles // per_block)
    children = np.random.SeedSequence(config.seed).spawn(n_blocks)
    left = projectiles
    for child in children:
        count = min(per_block, left)
        left -= count
        rng = np.random.default_rng(child)
        v_r = relative_speeds(sample_target_velocity(config, rng, count * m), v_p)
        rate = (np.asarray(sigma(v_r), dtype=float) * v_r).reshape(count, m)
        acc = acc.merge(_Moments.of(np.exp(-scale * rate.mean(axis=1))))
    return acc.estimate()

"""Physical constants and unit conversions.

Everything inside the package is SI. Atomic units only show up at the
boundary, through the ``*_au_to_si`` helpers and the config parser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.constants as sc

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA values used throughout the package (SI)."""

    hbar: float = sc.hbar
    k_B: float = sc.k
    m_e: float = sc.m_e
    c: float = sc.c
    a_0: float = sc.physical_constants["Bohr radius"][0]
    alpha_fs: float = sc.fine_structure
    amu: float = sc.physical_constants["atomic mass constant"][0]

    @property
    def hartree(self) -> float:
        """Hartree energy m_e c^2 alpha^2 in joules."""
        return self.m_e * self.c**2 * self.alpha_fs**2


CONSTANTS = PhysicalConstants()

HBAR = CONSTANTS.hbar
K_B = CONSTANTS.k_B
AMU = CONSTANTS.amu
A0 = CONSTANTS.a_0
HARTREE = CONSTANTS.hartree
TORR = sc.torr


@dataclass(frozen=True)
class ParticleSpecies:
    label: str
    mass: float  # kg

    def __post_init__(self):
        if not (self.mass > 0):
            raise DomainError(f"species {self.label!r}: mass must be > 0, got {self.mass!r}")

    @classmethod
    def from_amu(cls, label: str, mass_amu: float) -> "ParticleSpecies":
        return cls(label, mass_amu * AMU)


@dataclass(frozen=True)
class CollisionSystem:
    """Projectile/target pair with its reduced mass and mass factor.

    ``mass_factor`` is (m_p + m_t) / m_t, the ratio m_p / mu. A target of
    infinite mass gives the static-scatterer limit mu = m_p, mass factor 1.
    """

    projectile: ParticleSpecies
    target: ParticleSpecies
    reduced_mass: float = field(init=False)
    mass_factor: float = field(init=False)

    def __post_init__(self):
        m_p = self.projectile.mass
        m_t = self.target.mass
        if math.isinf(m_t):
            mu, factor = m_p, 1.0
        else:
            mu = m_p * m_t / (m_p + m_t)
            factor = (m_p + m_t) / m_t
        object.__setattr__(self, "reduced_mass", mu)
        object.__setattr__(self, "mass_factor", factor)

    @classmethod
    def static_target(cls, projectile: ParticleSpecies, label: str = "static") -> "CollisionSystem":
        return cls(projectile, ParticleSpecies(label, math.inf))

    def k_projectile(self, v_p):
        return wavevector(self.projectile.mass, v_p)

    def k_relative(self, v_r):
        return wavevector(self.reduced_mass, v_r)

    def speed_from_k(self, k_r):
        """Relative speed for a relative wavevector (inverse of ``k_relative``)."""
        return k_r * HBAR / self.reduced_mass


def wavevector(mass, speed):
    """de Broglie wavevector m v / hbar (1/m). Works on arrays."""
    if not (mass > 0):
        raise DomainError(f"mass must be > 0, got {mass!r}")
    if np.any(np.asarray(speed) < 0):
        raise DomainError("speed must be >= 0")
    return mass * speed / HBAR


def _non_negative(name, value):
    if value < 0:
        raise DomainError(f"{name} must be >= 0, got {value!r}")


def c6_au_to_si(c6_au: float) -> float:
    """C6 dispersion coefficient from E_h a_0^6 to J m^6."""
    _non_negative("C6", c6_au)
    return c6_au * HARTREE * A0**6


def c6_si_to_au(c6: float) -> float:
    _non_negative("C6", c6)
    return c6 / (HARTREE * A0**6)


def c12_au_to_si(c12_au: float) -> float:
    _non_negative("C12", c12_au)
    return c12_au * HARTREE * A0**12


def polarizability_au_to_si(alpha_au: float) -> float:
    """Static polarizability volume from a_0^3 to m^3."""
    _non_negative("polarizability", alpha_au)
    return alpha_au * A0**3


def polarizability_si_to_au(alpha: float) -> float:
    _non_negative("polarizability", alpha)
    return alpha / A0**3


def pressure_to_density(pressure_pa: float, temperature: float) -> float:
    """Ideal-gas number density P / (k_B T) in 1/m^3."""
    if not (temperature > 0):
        raise DomainError(f"temperature must be > 0 for a pressure-defined density, got {temperature!r}")
    _non_negative("pressure", pressure_pa)
    return pressure_pa / (K_B * temperature)

"""Model interaction potentials.

Each branch is an immutable dataclass. ``evaluate`` gives V(r) in joules;
``analytic_swave_reference`` gives closed-form s-wave phase shifts for the
branches that have one, used as an oracle for the radial solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import HBAR
from .errors import DomainError, UnsupportedPotentialError


def _positive(name, value):
    if not (value > 0) or not math.isfinite(value):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")


@dataclass(frozen=True)
class PureC6:
    """Purely attractive -C6/r^6 tail. Only the semiclassical path handles it."""

    C6: float  # J m^6

    def __post_init__(self):
        _positive("C6", self.C6)


@dataclass(frozen=True)
class LennardJones:
    """V(r) = C12/r^12 - C6/r^6."""

    C12: float  # J m^12
    C6: float  # J m^6

    def __post_init__(self):
        _positive("C12", self.C12)
        _positive("C6", self.C6)

    @classmethod
    def from_well(cls, epsilon: float, r_m: float) -> "LennardJones":
        """Build from the well depth (J) and the position of the minimum (m)."""
        _positive("epsilon", epsilon)
        _positive("r_m", r_m)
        c6 = 2.0 * epsilon * r_m**6
        return cls(C12=epsilon * r_m**12, C6=c6)

    @property
    def epsilon(self) -> float:
        return self.C6**2 / (4.0 * self.C12)

    @property
    def r_m(self) -> float:
        return (2.0 * self.C12 / self.C6) ** (1.0 / 6.0)


@dataclass(frozen=True)
class HardSphere:
    R: float  # m

    def __post_init__(self):
        _positive("R", self.R)


@dataclass(frozen=True)
class SquareWell:
    """Attractive well of depth V0 (> 0) and radius R."""

    V0: float  # J
    R: float  # m

    def __post_init__(self):
        _positive("V0", self.V0)
        _positive("R", self.R)


@dataclass(frozen=True)
class ScatteringLength:
    """s-wave contact model; ``a`` may have either sign."""

    a: float  # m

    def __post_init__(self):
        if not math.isfinite(self.a):
            raise DomainError(f"scattering length must be finite, got {self.a!r}")


PotentialModel = Union[PureC6, LennardJones, HardSphere, SquareWell, ScatteringLength]


def evaluate(potential: PotentialModel, r):
    """V(r) in joules; ``r`` may be a scalar or an array (all > 0).

    HardSphere returns +inf inside the core. ScatteringLength is a contact
    pseudo-potential and is zero for every r > 0.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError("r must be > 0")
    if isinstance(potential, PureC6):
        out = -potential.C6 / r_arr**6
    elif isinstance(potential, LennardJones):
        inv6 = 1.0 / r_arr**6
        out = (potential.C12 * inv6 - potential.C6) * inv6
    elif isinstance(potential, HardSphere):
        out = np.where(r_arr <= potential.R, np.inf, 0.0)
    elif isinstance(potential, SquareWell):
        out = np.where(r_arr < potential.R, -potential.V0, 0.0)
    elif isinstance(potential, ScatteringLength):
        out = np.zeros_like(r_arr)
    else:
        raise UnsupportedPotentialError(f"unknown potential {type(potential).__name__}")
    return out if np.ndim(r) else float(out)


def characteristic_length(potential: PotentialModel, reduced_mass: float | None = None) -> float:
    """Length scale used as the interaction range in diagnostics.

    r_m for Lennard-Jones, R for the hard sphere and the well, |a| for the
    contact model. PureC6 has no minimum, so the van der Waals length
    (2 mu C6 / hbar^2)^(1/4) / 2 is used, which needs the reduced mass.
    """
    if isinstance(potential, LennardJones):
        return potential.r_m
    if isinstance(potential, (HardSphere, SquareWell)):
        return potential.R
    if isinstance(potential, ScatteringLength):
        return abs(potential.a)
    if isinstance(potential, PureC6):
        if reduced_mass is None:
            raise DomainError("PureC6 characteristic length needs the reduced mass")
        return 0.5 * (2.0 * reduced_mass * potential.C6 / HBAR**2) ** 0.25
    raise UnsupportedPotentialError(f"unknown potential {type(potential).__name__}")


def characteristic_energy(potential: PotentialModel, reduced_mass: float | None = None) -> float:
    """Energy scale: well depth, V0, or C6/L^6 at the characteristic length."""
    if isinstance(potential, LennardJones):
        return potential.epsilon
    if isinstance(potential, SquareWell):
        return potential.V0
    if isinstance(potential, PureC6):
        return potential.C6 / characteristic_length(potential, reduced_mass) ** 6
    if isinstance(potential, ScatteringLength):
        if reduced_mass is None:
            raise DomainError("contact-model characteristic energy needs the reduced mass")
        return HBAR**2 / (2.0 * reduced_mass * potential.a**2) if potential.a else 0.0
    if isinstance(potential, HardSphere):
        if reduced_mass is None:
            raise DomainError("hard-sphere characteristic energy needs the reduced mass")
        return HBAR**2 / (2.0 * reduced_mass * potential.R**2)
    raise UnsupportedPotentialError(f"unknown potential {type(potential).__name__}")


def analytic_swave_reference(potential: PotentialModel, k_r: float, reduced_mass: float | None = None) -> float:
    """Closed-form s-wave phase shift for HardSphere and SquareWell.

    Returned in (-pi/2, pi/2]. The square well needs ``reduced_mass`` for the
    inner wavenumber K = sqrt(k^2 + 2 mu V0 / hbar^2); the matching condition
    is tan(delta + k R) = (k / K) tan(K R).
    """
    if not (k_r > 0):
        raise DomainError(f"k_r must be > 0, got {k_r!r}")
    if isinstance(potential, HardSphere):
        return wrap_phase(-k_r * potential.R)
    if isinstance(potential, SquareWell):
        if reduced_mass is None or not (reduced_mass > 0):
            raise DomainError("square-well reference needs a positive reduced mass")
        K = math.sqrt(k_r**2 + 2.0 * reduced_mass * potential.V0 / HBAR**2)
        kR, KR = k_r * potential.R, K * potential.R
        # atan2 form stays finite when tan(KR) diverges
        delta = math.atan2(k_r * math.sin(KR), K * math.cos(KR)) - kR
        return wrap_phase(delta)
    raise UnsupportedPotentialError(
        f"no analytic s-wave phase shift for {type(potential).__name__}"
    )


def wrap_phase(delta):
    """Map a phase shift (defined mod pi) into (-pi/2, pi/2]."""
    d = np.asarray(delta, dtype=float)
    w = d - np.pi * np.round(d / np.pi)
    w = np.where(w <= -np.pi / 2, w + np.pi, w)
    return w if np.ndim(delta) else float(w)

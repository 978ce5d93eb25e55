"""Index of refraction of a dilute gas for a matter wave.

Every formula below is first order in the target density n_t. They differ
in how the target motion enters:

``fixed_centers``  2 pi n_t f(k_p) / k_p^2 (static scatterers)
``forrey``         (2 pi n_t / k_p) <f(k_r) / k_r>
``fizeau_legacy``  (2 pi n_t / k_p) <f(k_r) cos(theta_r) / k_r>
``corrected``      2 pi n_t (m_p + m_t) / m_t <f(k_r)> / k_p^2
``neutron_swave``  -2 pi n_t (m_p + m_t) / m_t a / k_p^2

Only ``corrected`` reproduces the Beer-Lambert attenuation with the
flux-weighted effective cross section <sigma v_r> / v_p at any temperature.
The others are kept for comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import thermal
from .constants import A0, CONSTANTS, HBAR, CollisionSystem, ParticleSpecies
from .errors import DomainError
from .potentials import PotentialModel, PureC6, characteristic_length
from .scattering import (
    AmplitudeModel,
    ComplexAmplitude,
    ConstantAmplitude,
    TabulatedAmplitude,
    amplitude_model,
    cross_section_from_amplitude,
)
from .thermal import DeltaRest, VelocityDistribution

VALIDITY_THRESHOLD = 1e-2
MAGNITUDE_COEFFICIENT = 4.12e-3
HALF_MSV = 4.04
FORMULAS = ("fixed_centers", "forrey", "fizeau_legacy", "corrected", "neutron_swave")


@dataclass(frozen=True)
class GasSample:
    """Target gas: species, number density (1/m^3), velocity law and interaction."""

    species: ParticleSpecies
    n_t: float
    distribution: VelocityDistribution
    potential: PotentialModel

    def __post_init__(self):
        if not (self.n_t > 0) or not math.isfinite(self.n_t):
            raise DomainError(f"n_t must be finite and > 0, got {self.n_t!r}")


@dataclass(frozen=True)
class ValidityReport:
    """Dimensionless ratios behind the dilute-gas assumptions.

    Each flag is true when its ratio is below ``threshold``.
    """

    spacing: float
    lambda_over_spacing: float
    range_over_spacing: float
    mean_field: float
    threshold: float = VALIDITY_THRESHOLD

    @property
    def wavelength_ok(self) -> bool:
        return self.lambda_over_spacing < self.threshold

    @property
    def range_ok(self) -> bool:
        return self.range_over_spacing < self.threshold

    @property
    def mean_field_ok(self) -> bool:
        return self.mean_field < self.threshold

    @property
    def passed(self) -> bool:
        return self.wavelength_ok and self.range_ok and self.mean_field_ok


@dataclass(frozen=True)
class IndexResult:
    n_minus_1: complex
    formula: str
    quad_error: float = 0.0
    diagnostics: ValidityReport | None = None

    @property
    def rho(self) -> float:
        """Re(n-1) / Im(n-1); nan when the imaginary part vanishes."""
        im = self.n_minus_1.imag
        return self.n_minus_1.real / im if im != 0 else math.nan


def _check_speed(v_p):
    if not (v_p > 0) or not math.isfinite(v_p):
        raise DomainError(f"v_p must be finite and > 0, got {v_p!r}")


def thermal_amplitude(
    amplitude: AmplitudeModel, system: CollisionSystem, dist: VelocityDistribution, v_p: float
) -> AmplitudeModel:
    """Cheap stand-in for an expensive amplitude over the thermal k_r window.

    Numerov amplitudes are replaced by a Chebyshev interpolant over the
    relative wavevectors the quadrature can visit; other models are returned
    unchanged.
    """
    if not getattr(amplitude, "expensive", False) or isinstance(dist, DeltaRest):
        return amplitude
    if isinstance(dist, thermal.Custom):
        return amplitude
    V, _, alpha = thermal._effective_frame(dist, v_p)
    lo, hi = thermal.relative_speed_window(V, alpha)
    # the law vanishes like v_r^2 at the origin; below 1e-3 of the upper end
    # the amplitude is held at its end value
    lo = max(lo, 1e-3 * hi)
    return TabulatedAmplitude(amplitude, system.k_relative(lo), system.k_relative(hi))


def _resolve_amplitude(system, sample, v_p, amplitude):
    if amplitude is None:
        amplitude = amplitude_model(sample.potential, system)
    return thermal_amplitude(amplitude, system, sample.distribution, v_p)


def _average(fn, sample, v_p, directional=False, rtol=1e-8):
    return thermal.average_over_targets(
        fn, sample.distribution, v_p, directional=directional, rtol=rtol, full_output=True
    )


def _relative(err, value):
    return float(err / abs(value)) if value != 0 else float(err)


def index_fixed_centers(f_at_kp, n_t: float, k_p: float) -> IndexResult:
    """Static-scatterer index 2 pi n_t f(k_p) / k_p^2."""
    if not (k_p > 0):
        raise DomainError(f"k_p must be > 0, got {k_p!r}")
    f = f_at_kp.value if isinstance(f_at_kp, ComplexAmplitude) else complex(f_at_kp)
    return IndexResult(complex(2.0 * math.pi * n_t * f / k_p**2), "fixed_centers")


def index_forrey(system: CollisionSystem, sample: GasSample, v_p: float, *,
                 amplitude: AmplitudeModel | None = None, rtol: float = 1e-8) -> IndexResult:
    """(2 pi n_t / k_p) <f(k_r) / k_r>."""
    _check_speed(v_p)
    amp = _resolve_amplitude(system, sample, v_p, amplitude)
    k_p = system.k_projectile(v_p)
    avg, err = _average(lambda v: amp(system.k_relative(v)) / system.k_relative(v), sample, v_p, rtol=rtol)
    return IndexResult(complex(2.0 * math.pi * sample.n_t / k_p * avg), "forrey", _relative(err, avg))


def index_fizeau_legacy(system: CollisionSystem, sample: GasSample, v_p: float, *,
                        amplitude: AmplitudeModel | None = None, rtol: float = 1e-8) -> IndexResult:
    """Index from the beam-axis component of the averaged centre-of-mass wavevector shift.

    k_{p,m} = k_p + <(n_CM - 1) k_r> with n_CM - 1 = 2 pi n_t f(k_r) / k_r^2,
    linearised in n_t: n - 1 = <(n_CM - 1) k_r cos(theta_r)> / k_p.
    """
    _check_speed(v_p)
    amp = _resolve_amplitude(system, sample, v_p, amplitude)
    k_p = system.k_projectile(v_p)
    avg, err = _average(
        lambda v: amp(system.k_relative(v)) / system.k_relative(v), sample, v_p, directional=True, rtol=rtol
    )
    return IndexResult(complex(2.0 * math.pi * sample.n_t / k_p * avg), "fizeau_legacy", _relative(err, avg))


def index_corrected(system: CollisionSystem, sample: GasSample, v_p: float, *,
                    amplitude: AmplitudeModel | None = None, rtol: float = 1e-8) -> IndexResult:
    """2 pi n_t ((m_p + m_t) / m_t) <f(k_r)> / k_p^2."""
    _check_speed(v_p)
    amp = _resolve_amplitude(system, sample, v_p, amplitude)
    k_p = system.k_projectile(v_p)
    avg, err = _average(lambda v: amp(system.k_relative(v)), sample, v_p, rtol=rtol)
    value = 2.0 * math.pi * sample.n_t * system.mass_factor * avg / k_p**2
    return IndexResult(complex(value), "corrected", _relative(err, avg))


def index_neutron(a: float, system: CollisionSystem, n_t: float, k_p: float, *,
                  distribution: VelocityDistribution | None = None,
                  imaginary: bool = False) -> IndexResult:
    """Leading-order s-wave index -2 pi n_t ((m_p + m_t) / m_t) a / k_p^2.

    With ``imaginary=True`` the absorptive part 2 pi n_t mf <k_r> a^2 / k_p^2
    is added, averaged over ``distribution`` (default: targets at rest).
    """
    if not (k_p > 0):
        raise DomainError(f"k_p must be > 0, got {k_p!r}")
    pref = 2.0 * math.pi * n_t * system.mass_factor / k_p**2
    re = -pref * a
    im, err = 0.0, 0.0
    if imaginary:
        dist = DeltaRest() if distribution is None else distribution
        v_p = k_p * HBAR / system.projectile.mass
        mean_k, abs_err = thermal.average_over_targets(
            lambda v: system.k_relative(v), dist, v_p, full_output=True
        )
        im = pref * mean_k * a * a
        err = _relative(abs_err, mean_k)
    return IndexResult(complex(re, im), "neutron_swave", err)


def transmission_wave(n_minus_1: complex, k_p: float, L: float):
    """(T, phase) of a wave crossing a slab of length L: exp(-2 Im(n-1) k_p L), Re(n-1) k_p L."""
    if not (L >= 0):
        raise DomainError(f"L must be >= 0, got {L!r}")
    n1 = complex(n_minus_1)
    return math.exp(-2.0 * n1.imag * k_p * L), n1.real * k_p * L


def beam_effective_cross_section(system: CollisionSystem, sample: GasSample, v_p: float, *,
                                 amplitude: AmplitudeModel | None = None,
                                 sigma: Callable | None = None, rtol: float = 1e-8) -> float:
    """<sigma(v_r) v_r> / v_p with sigma from the optical theorem unless given."""
    _check_speed(v_p)
    if sigma is None:
        amp = _resolve_amplitude(system, sample, v_p, amplitude)
        sigma = cross_section_from_amplitude(amp, system)
    return thermal.effective_cross_section(sigma, sample.distribution, v_p, rtol=rtol)


def transmission_beer_lambert(sample: GasSample, system: CollisionSystem, v_p: float, L: float, *,
                              amplitude: AmplitudeModel | None = None,
                              sigma: Callable | None = None, rtol: float = 1e-8) -> float:
    """exp(-n_t <sigma_eff> L)."""
    if not (L >= 0):
        raise DomainError(f"L must be >= 0, got {L!r}")
    s_eff = beam_effective_cross_section(system, sample, v_p, amplitude=amplitude, sigma=sigma, rtol=rtol)
    return math.exp(-sample.n_t * s_eff * L)


def rho_ratio(system: CollisionSystem, potential: PureC6, v_p: float,
              dist: VelocityDistribution, n_t: float = 1.0) -> float:
    """Re(n-1) / Im(n-1) of the corrected index with semiclassical C6 amplitudes."""
    if not isinstance(potential, PureC6):
        raise DomainError("rho_ratio needs a PureC6 potential")
    sample = GasSample(system.target, n_t, dist, potential)
    res = index_corrected(system, sample, v_p)
    if res.n_minus_1.imag == 0:
        raise DomainError("Im(n-1) vanishes; rho undefined")
    return res.n_minus_1.real / res.n_minus_1.imag


def optics_index(n_t: float, alpha_au: float) -> float:
    """Static optical index minus one, 2 pi n_t a0^3 alpha_au."""
    if n_t < 0 or alpha_au < 0:
        raise DomainError("n_t and alpha_au must be >= 0")
    return 2.0 * math.pi * n_t * A0**3 * alpha_au


def magnitude_estimate_im(C6_au: float, m_p: float, v_p: float) -> float:
    """Order-of-magnitude Im(n-1)/n_t (m^3) in the printed closed form.

    4.12e-3 a0^3 (m_e / m_p) (c / v_p)^(7/5) C6_au^(2/5): cold gas, m_p << m_t.
    """
    if not (C6_au > 0 and m_p > 0 and v_p > 0):
        raise DomainError("C6_au, m_p and v_p must be > 0")
    c = CONSTANTS
    return MAGNITUDE_COEFFICIENT * A0**3 * (c.m_e / m_p) * (c.c / v_p) ** 1.4 * C6_au**0.4


def magnitude_estimate_im_wavevector(C6: float, m_p: float, v_p: float) -> float:
    """Same estimate before unit reduction: (4.04 / k_p) (C6 / hbar v_p)^(2/5), C6 in J m^6."""
    if not (C6 > 0 and m_p > 0 and v_p > 0):
        raise DomainError("C6, m_p and v_p must be > 0")
    k_p = m_p * v_p / HBAR
    return HALF_MSV / k_p * (C6 / (HBAR * v_p)) ** 0.4


def magnitude_coefficient() -> float:
    """4.04 alpha_fs^(7/5): the dimensionless prefactor of the reduced estimate."""
    return HALF_MSV * CONSTANTS.alpha_fs**1.4


def validity_check(sample: GasSample, system: CollisionSystem, v_p: float,
                   result: IndexResult | None = None,
                   threshold: float = VALIDITY_THRESHOLD) -> ValidityReport:
    """Ratios of wavelength, interaction range and |n-1| to the dilute-gas scales."""
    _check_speed(v_p)
    cube_root = sample.n_t ** (1.0 / 3.0)
    lam = 2.0 * math.pi / system.k_projectile(v_p)
    rng = characteristic_length(sample.potential, system.reduced_mass)
    mean_field = abs(result.n_minus_1) if result is not None else 0.0
    return ValidityReport(1.0 / cube_root, lam * cube_root, rng * cube_root, mean_field, threshold)


def with_validity(result: IndexResult, sample, system, v_p) -> IndexResult:
    return replace(result, diagnostics=validity_check(sample, system, v_p, result))

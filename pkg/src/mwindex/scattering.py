"""Partial-wave phase shifts, forward amplitudes and total cross sections.

Phase shifts come from one of three paths:

* ``analytic``: hard sphere (tan delta_l = j_l(kR) / y_l(kR)) and the
  s-wave contact model (delta_0 = -arctan(k a));
* ``numerov``: radial integration for Lennard-Jones and the square well;
* ``semiclassical_c6``: Jeffreys-Born phases for a pure -C6/r^6 tail.

For the semiclassical path the low partial waves have phases that change by
more than pi/2 from one l to the next. Their exp(2i delta) terms are
pseudo-random and are damped by a smooth weight, which turns the sum into a
faithful quadrature of the impact-parameter integral and keeps f(k) smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import special

from . import bessel
from .constants import HBAR, CollisionSystem
from .errors import DomainError, SolverError, UnsupportedPotentialError
from .numerov import RadialGrid, solve_partial_waves
from .potentials import (
    HardSphere,
    LennardJones,
    PotentialModel,
    PureC6,
    ScatteringLength,
    SquareWell,
    characteristic_length,
    evaluate,
    wrap_phase,
)

MSV_COEFFICIENT = 8.08
TAIL_TOL = 1e-6
TAIL_RUN = 5
L_CAP = 100_000
# |V| below this fraction of the collision energy counts as asymptotic
ASYMPTOTIC_FRACTION = 1e-9
CHUNK = 128


@dataclass(frozen=True)
class PhaseShiftTable:
    """Phase shifts delta_l (rad) for l = 0..l_max at one relative wavevector.

    ``weight`` multiplies exp(2 i delta_l) in every partial-wave sum; it is 1
    except on the semiclassical path, where pseudo-random low-l phases are
    damped towards 0.

    ``tail_amplitude`` is A in delta_l = A / (l + 1/2)^5, the Born phase of a
    -C6/r^6 tail. When non-zero the partial waves beyond l_max are summed
    analytically in the amplitude and cross section.
    """

    k_r: float
    l: np.ndarray
    delta: np.ndarray
    method: str
    weight: np.ndarray | None = None
    tail_amplitude: float = 0.0
    diagnostics: dict = field(default_factory=dict, compare=False)

    def tail_sums(self):
        """(sum (2l+1) delta_l, sum (2l+1) delta_l^2) over l > l_max."""
        A = self.tail_amplitude
        if A == 0.0:
            return 0.0, 0.0
        q = self.l_max + 1.5
        return 2.0 * A * float(special.zeta(4.0, q)), 2.0 * A * A * float(special.zeta(9.0, q))

    @property
    def l_max(self) -> int:
        return int(self.l[-1])

    @property
    def entries(self):
        return list(zip(self.l.tolist(), self.delta.tolist()))

    def s_matrix_terms(self):
        """(2l+1) (w exp(2 i delta) - 1) / (2i) for each partial wave."""
        two_l1 = 2.0 * self.l + 1.0
        if self.weight is None:
            # exp(i d) sin(d) avoids the cancellation in exp(2id) - 1 for tiny d
            return two_l1 * np.exp(1j * self.delta) * np.sin(self.delta)
        return two_l1 * (self.weight * np.exp(2j * self.delta) - 1.0) / 2j


@dataclass(frozen=True)
class ComplexAmplitude:
    """Forward scattering amplitude f(k_r) in metres."""

    re: float
    im: float
    k_r: float

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)


def semiclassical_phase_shift_c6(C6: float, system: CollisionSystem, k_r, l):
    """Jeffreys-Born phase (3 pi / 16) mu C6 k^4 / (hbar^2 (l + 1/2)^5)."""
    if not (k_r > 0):
        raise DomainError(f"k_r must be > 0, got {k_r!r}")
    l_arr = np.asarray(l)
    if np.any(l_arr < 0):
        raise DomainError("l must be >= 0")
    mu = system.reduced_mass
    return _c6_tail_amplitude(C6, system, k_r) / (l_arr + 0.5) ** 5


def _c6_tail_amplitude(C6, system, k_r):
    return 3.0 * math.pi / 16.0 * system.reduced_mass * C6 * k_r**4 / HBAR**2


def _tail_index(delta, l, edge, tol):
    """Index of the last entry of the first run of TAIL_RUN small phases past ``edge``."""
    small = (np.abs(delta) < tol) & (l >= edge)
    run = 0
    for i, s in enumerate(small):
        run = run + 1 if s else 0
        if run == TAIL_RUN:
            return i
    return None


def _semiclassical_table(pot: PureC6, system, k, tail_tol):
    amp = _c6_tail_amplitude(pot.C6, system, k)
    l_tail = int(math.ceil((amp / tail_tol) ** 0.2)) + TAIL_RUN
    if l_tail > L_CAP:
        raise SolverError("semiclassical partial-wave sum exceeds the l cap", l_needed=l_tail, cap=L_CAP)
    l = np.arange(l_tail + 1)
    delta = amp / (l + 0.5) ** 5
    edge = amp**0.2
    stop = _tail_index(delta, l, edge, tail_tol)
    l, delta = l[: stop + 1], delta[: stop + 1]
    slope = 5.0 * delta / (l + 0.5)
    weight = np.exp(-((slope / (0.5 * math.pi)) ** 4))
    return PhaseShiftTable(k, l, delta, "semiclassical_c6", weight, amp, {"l_edge": edge})


def _hard_sphere_table(pot: HardSphere, k, tail_tol):
    x = k * pot.R
    lmax = int(max(2 * x + 30, 40))
    while True:
        j = bessel.sph_jn_all(lmax, x)
        y = bessel.sph_yn_all(lmax, x)
        with np.errstate(all="ignore"):
            delta = np.arctan(j / y)
        delta = np.where(np.isfinite(delta), delta, 0.0)
        l = np.arange(lmax + 1)
        stop = _tail_index(delta, l, x, tail_tol)
        if stop is not None:
            return PhaseShiftTable(k, l[: stop + 1], delta[: stop + 1], "analytic")
        if lmax > L_CAP:
            raise SolverError("hard-sphere phase shifts did not decay", l=lmax)
        lmax *= 2


def _contact_table(pot: ScatteringLength, k):
    n = int(math.ceil(k * abs(pot.a))) + TAIL_RUN + 1
    delta = np.zeros(n)
    delta[0] = -math.atan(k * pot.a)
    return PhaseShiftTable(k, np.arange(n), delta, "analytic")


def _lj_inner_radius(pot: LennardJones, energy):
    # C12 x^2 - C6 x = depth * E with x = r^-6
    target = 1.0e3 * energy
    x = (pot.C6 + math.sqrt(pot.C6**2 + 4.0 * pot.C12 * target)) / (2.0 * pot.C12)
    return x ** (-1.0 / 6.0)


class _RadialSetup:
    """Grid family for one (potential, system, k, step) combination.

    Phase shifts from every grid are extrapolated to zero step as a
    polynomial in h^power (Lagrange form at h = 0).
    """

    def __init__(self, pot, system, k, steps_per_wavelength, refine=1):
        mu = system.reduced_mass
        self.k = k
        energy = (HBAR * k) ** 2 / (2.0 * mu)
        scale = 2.0 * mu / HBAR**2
        reduced = lambda r: scale * evaluate(pot, r)
        if isinstance(pot, SquareWell):
            # Numerov is only second order across the jump; R sits midway
            # between nodes on every grid so the error stays a series in h^2
            depth = scale * pot.V0
            h0 = 2.0 * math.pi / math.sqrt(k * k + depth) / (steps_per_wavelength * refine)
            m = max(int(math.ceil(pot.R / h0)), 8)
            counts = (m, 2 * m, 4 * m)
            self.power = 2
            self.grids = [RadialGrid(0.0, pot.R / (c + 0.5), reduced, True, pot.R) for c in counts]
            self.r_match = [g.h * (c + 2) for g, c in zip(self.grids, counts)]
            self.match_sep = min(max(0.25 * pot.R, 8 * self.grids[0].h), 0.25 * 2.0 * math.pi / k)
        elif isinstance(pot, LennardJones):
            depth = scale * pot.epsilon
            h = 2.0 * math.pi / math.sqrt(k * k + depth) / (steps_per_wavelength * refine)
            r0 = _lj_inner_radius(pot, energy)
            r_asym = (pot.C6 / (ASYMPTOTIC_FRACTION * energy)) ** (1.0 / 6.0)
            self.power = 4
            self.grids = [RadialGrid(r0, h, reduced, False), RadialGrid(r0, h / 2.0, reduced, False)]
            self.r_match = [r_asym, r_asym]
            self.match_sep = max(min(0.25 * 2.0 * math.pi / k, 0.25 * r_asym), 8 * h)
        else:
            raise UnsupportedPotentialError(f"no radial solver path for {type(pot).__name__}")

    def solve(self, l_lo, l_hi, richardson=True):
        grids = self.grids if richardson else self.grids[:1]
        deltas, steps, diag = [], 0, {}
        for g, rm in zip(grids, self.r_match):
            d, diag = solve_partial_waves(g, self.k, l_lo, l_hi, rm, self.match_sep)
            deltas.append(d if not deltas else deltas[0] + wrap_phase(d - deltas[0]))
            steps += diag["steps"]
        diag = dict(diag, steps=steps)
        if len(deltas) == 1:
            return deltas[0], 0.0, diag
        x = [g.h**self.power for g in grids]
        out = np.zeros_like(deltas[0])
        for i, d in enumerate(deltas):
            w = 1.0
            for j, xj in enumerate(x):
                if j != i:
                    w *= xj / (xj - x[i])
            out += w * d
        return wrap_phase(out), float(np.max(np.abs(out - deltas[-1]))), diag


def _numerov_table(pot, system, k, steps_per_wavelength, tail_tol, richardson):
    edge = k * characteristic_length(pot)
    refine = 1
    while True:
        try:
            setup = _RadialSetup(pot, system, k, steps_per_wavelength, refine)
            deltas, errs = [], []
            diag = {"steps": 0}
            l_lo = 0
            while True:
                l_hi = l_lo + CHUNK - 1
                d, err, dg = setup.solve(l_lo, l_hi, richardson)
                deltas.append(d)
                errs.append(err)
                diag["steps"] += dg["steps"]
                diag["step"] = dg["step"]
                diag["r_match"] = dg["r_match"]
                delta = np.concatenate(deltas)
                l = np.arange(delta.size)
                stop = _tail_index(delta, l, edge, tail_tol)
                if stop is not None:
                    break
                if l_hi >= L_CAP:
                    raise SolverError(
                        "phase shifts did not fall below the tail tolerance",
                        l=l_hi, steps=diag["steps"], last_delta=float(delta[-1]),
                    )
                l_lo = l_hi + 1
            break
        except SolverError as exc:
            if "forbidden region" in str(exc) and refine < 16:
                refine *= 2
                continue
            raise
    diag["extrapolation_error"] = max(errs)
    diag["l_edge"] = edge
    tail = _c6_tail_amplitude(pot.C6, system, k) if isinstance(pot, LennardJones) else 0.0
    return PhaseShiftTable(k, l[: stop + 1], delta[: stop + 1], "numerov", None, tail, diag)


def phase_shifts(
    potential: PotentialModel,
    system: CollisionSystem,
    k_r: float,
    *,
    steps_per_wavelength: int = 48,
    tail_tol: float = TAIL_TOL,
    richardson: bool = True,
) -> PhaseShiftTable:
    """Phase shifts for every partial wave that matters at ``k_r``.

    The table stops at the first run of five consecutive |delta_l| below
    ``tail_tol`` past the semiclassical edge k_r * (range). Numerov results
    are Richardson-extrapolated from steps h and h/2 unless
    ``richardson=False``; the size of the correction is reported as
    ``diagnostics['extrapolation_error']``.
    """
    if not (k_r > 0) or not math.isfinite(k_r):
        raise DomainError(f"k_r must be finite and > 0, got {k_r!r}")
    if isinstance(potential, PureC6):
        return _semiclassical_table(potential, system, k_r, tail_tol)
    if isinstance(potential, HardSphere):
        return _hard_sphere_table(potential, k_r, tail_tol)
    if isinstance(potential, ScatteringLength):
        return _contact_table(potential, k_r)
    if isinstance(potential, (LennardJones, SquareWell)):
        return _numerov_table(potential, system, k_r, steps_per_wavelength, tail_tol, richardson)
    raise UnsupportedPotentialError(f"unknown potential {type(potential).__name__}")


def forward_amplitude(table: PhaseShiftTable) -> ComplexAmplitude:
    """f(0) = (1 / 2ik) sum_l (2l+1) (exp(2i delta_l) - 1)."""
    if table.l.size == 0:
        raise DomainError("empty phase-shift table")
    re_tail, im_tail = table.tail_sums()
    f = (np.sum(table.s_matrix_terms()) + complex(re_tail, im_tail)) / table.k_r
    return ComplexAmplitude(float(f.real), float(f.imag), table.k_r)


def partial_wave_cross_section(table: PhaseShiftTable) -> float:
    """(4 pi / k^2) sum_l (2l+1) sin^2 delta_l, with the same low-l weighting."""
    if table.l.size == 0:
        raise DomainError("empty phase-shift table")
    two_l1 = 2.0 * table.l + 1.0
    if table.weight is None:
        s2 = np.sin(table.delta) ** 2
    else:
        s2 = 0.5 * (1.0 - table.weight * np.cos(2.0 * table.delta))
    return float(4.0 * math.pi / table.k_r**2 * (np.sum(two_l1 * s2) + table.tail_sums()[1]))


def total_cross_section_optical(f: ComplexAmplitude) -> float:
    """Optical theorem: sigma = 4 pi Im f(0) / k."""
    if not (f.k_r > 0):
        raise DomainError("optical theorem needs k_r > 0; use 4 pi a^2 for the k -> 0 s-wave limit")
    return 4.0 * math.pi * f.im / f.k_r


def msv_cross_section(C6: float, v_r):
    """Closed-form C6 total cross section 8.08 (C6 / hbar v)^(2/5), m^2."""
    if not (C6 > 0):
        raise DomainError(f"C6 must be > 0, got {C6!r}")
    v = np.asarray(v_r, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("v_r must be > 0 (the cross section diverges at v_r = 0)")
    out = MSV_COEFFICIENT * (C6 / (HBAR * v)) ** 0.4
    return out if np.ndim(v_r) else float(out)


# ---------------------------------------------------------------------------
# amplitude models: callables k_r -> complex f(k_r), used by the averaging code


class AmplitudeModel:
    """Forward amplitude as a function of the relative wavevector.

    ``expensive`` marks models worth tabulating before a quadrature;
    ``vectorized`` marks models that evaluate arrays natively.
    """

    expensive = False
    vectorized = False

    def __call__(self, k_r):
        k = np.asarray(k_r, dtype=float)
        out = np.array([self.scalar(float(x)) for x in k.ravel()], dtype=complex).reshape(k.shape)
        return out if k.ndim else complex(out)

    def scalar(self, k_r: float) -> complex:
        raise NotImplementedError


class PartialWaveAmplitude(AmplitudeModel):
    """f(k) from a phase-shift table computed on demand (memoised per k)."""

    def __init__(self, potential: PotentialModel, system: CollisionSystem, **solver_options):
        self.potential = potential
        self.system = system
        self.solver_options = solver_options
        self.expensive = isinstance(potential, (LennardJones, SquareWell))
        self._cache = lru_cache(maxsize=4096)(self._compute)

    def _compute(self, k_r):
        table = phase_shifts(self.potential, self.system, k_r, **self.solver_options)
        return forward_amplitude(table).value

    def scalar(self, k_r):
        return self._cache(k_r)


class ContactAmplitude(AmplitudeModel):
    """Exact s-wave amplitude -a / (1 + i k a) of the contact model."""

    vectorized = True

    def __init__(self, a: float, leading_order: bool = False):
        self.a = a
        self.leading_order = leading_order

    def __call__(self, k_r):
        k = np.asarray(k_r, dtype=float)
        if self.leading_order:
            out = -self.a * np.ones_like(k) + 0j
        else:
            out = -self.a / (1.0 + 1j * k * self.a)
        return out if k.ndim else complex(out)

    def scalar(self, k_r):
        return self(k_r)


class ConstantAmplitude(AmplitudeModel):
    """k-independent amplitude; handy for tests and the neutron leading order."""

    vectorized = True

    def __init__(self, value: complex):
        self.value = complex(value)

    def __call__(self, k_r):
        k = np.asarray(k_r, dtype=float)
        out = np.full(k.shape, self.value, dtype=complex)
        return out if k.ndim else self.value

    def scalar(self, k_r):
        return self.value


class TabulatedAmplitude(AmplitudeModel):
    """Chebyshev interpolant of another model over [k_lo, k_hi] in the variable log k.

    Nodes are Chebyshev-Lobatto points; their number is doubled (reusing the
    previous nodes) until the trailing coefficients fall below
    ``rtol * max|f|`` or ``max_nodes`` is reached. Numerov amplitudes carry
    noise of a few 1e-9 relative, so targets much below 1e-8 only add nodes.
    Outside the interval the end values are held constant.
    """

    vectorized = True

    def __init__(self, source: AmplitudeModel, k_lo: float, k_hi: float, *,
                 rtol: float = 1e-8, min_nodes: int = 8, max_nodes: int = 256):
        if not (0 < k_lo < k_hi):
            raise DomainError(f"need 0 < k_lo < k_hi, got {k_lo!r}, {k_hi!r}")
        self.source = source
        self.domain = (k_lo, k_hi)
        self._log = (math.log(k_lo), math.log(k_hi))
        lo, hi = self._log
        n = min_nodes
        while True:
            x = np.cos(np.pi * np.arange(n + 1) / n)
            k_nodes = np.exp(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
            k_nodes[0], k_nodes[-1] = k_hi, k_lo
            values = np.asarray(source(k_nodes), dtype=complex)
            coef = C.chebfit(x, values, n)
            scale = max(np.max(np.abs(values)), 1e-300)
            tail = np.max(np.abs(coef[-3:]))
            if tail <= rtol * scale or n >= max_nodes:
                break
            n *= 2
        self.coef = coef
        self.k_nodes = k_nodes
        self.tail_error = float(tail / scale)

    def __call__(self, k_r):
        k = np.asarray(k_r, dtype=float)
        lo, hi = self._log
        with np.errstate(divide="ignore"):
            t = np.clip(np.log(k), lo, hi)
        x = (2.0 * t - (hi + lo)) / (hi - lo)
        out = C.chebval(x, self.coef)
        return out if k.ndim else complex(out)

    def scalar(self, k_r):
        return self(k_r)


def amplitude_model(potential: PotentialModel, system: CollisionSystem, **solver_options) -> AmplitudeModel:
    """Default forward-amplitude model for a potential branch."""
    if isinstance(potential, ScatteringLength):
        return ContactAmplitude(potential.a)
    return PartialWaveAmplitude(potential, system, **solver_options)


def cross_section_from_amplitude(amplitude: AmplitudeModel, system: CollisionSystem):
    """sigma(v_r) = 4 pi Im f(k_r) / k_r as a function of relative speed."""

    def sigma(v_r):
        k = system.k_relative(np.asarray(v_r, dtype=float))
        return 4.0 * math.pi * np.imag(amplitude(k)) / k

    return sigma

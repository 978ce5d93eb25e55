import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mwindex.constants import HBAR, K_B, CollisionSystem, ParticleSpecies, c6_au_to_si
from mwindex.errors import DomainError, UnsupportedPotentialError
from mwindex.potentials import (
    HardSphere,
    LennardJones,
    PureC6,
    ScatteringLength,
    SquareWell,
    analytic_swave_reference,
    wrap_phase,
)
from mwindex.scattering import (
    ComplexAmplitude,
    ContactAmplitude,
    PartialWaveAmplitude,
    PhaseShiftTable,
    TabulatedAmplitude,
    forward_amplitude,
    msv_cross_section,
    partial_wave_cross_section,
    phase_shifts,
    semiclassical_phase_shift_c6,
    total_cross_section_optical,
)

LJ = LennardJones.from_well(8e-22, 5e-10)
C6_NA_AR = c6_au_to_si(185.0)


@pytest.fixture(scope="module")
def lj_table(na_ar):
    return phase_shifts(LJ, na_ar, na_ar.k_relative(1000.0))


def _unitarity_gap(table):
    f = forward_amplitude(table)
    return total_cross_section_optical(f) / partial_wave_cross_section(table) - 1.0


def _assert_table_invariants(table, monotone_tail=True):
    assert np.array_equal(table.l, np.arange(table.l_max + 1))
    if monotone_tail:
        tail = np.abs(table.delta[int(0.8 * table.l.size):])
        assert np.all(np.diff(tail) <= 0)
    assert forward_amplitude(table).im >= 0


def _square_well_exact(sw, k, mu, l_max):
    from scipy import special as sp

    K = math.sqrt(k * k + 2 * mu * sw.V0 / HBAR**2)
    l = np.arange(l_max + 1)
    x, X = k * sw.R, K * sw.R
    num = k * sp.spherical_jn(l, x, True) * sp.spherical_jn(l, X) - K * sp.spherical_jn(l, x) * sp.spherical_jn(l, X, True)
    den = k * sp.spherical_yn(l, x, True) * sp.spherical_jn(l, X) - K * sp.spherical_yn(l, x) * sp.spherical_jn(l, X, True)
    return np.arctan(num / den)


def test_hard_sphere_low_energy(na_ar):
    R = 3e-10
    tab = phase_shifts(HardSphere(R), na_ar, 0.01 / R)
    assert tab.method == "analytic"
    assert tab.delta[0] == pytest.approx(-0.01, rel=1e-12)
    assert np.all(np.abs(tab.delta[1:]) < 1e-5)
    _assert_table_invariants(tab)


def test_hard_sphere_cross_section_limit(na_ar):
    R = 3e-10
    tab = phase_shifts(HardSphere(R), na_ar, 1e-3 / R)
    sigma = total_cross_section_optical(forward_amplitude(tab))
    assert sigma == pytest.approx(4 * math.pi * R**2, rel=1e-3)


@pytest.mark.parametrize("depth_K", [50.0, 300.0])
def test_square_well_swave_oracle(na_ar, depth_K):
    sw = SquareWell(depth_K * K_B, 3e-10)
    for k in np.geomspace(1e8, 1e11, 7):
        tab = phase_shifts(sw, na_ar, k)
        ref = analytic_swave_reference(sw, k, na_ar.reduced_mass)
        assert abs(wrap_phase(tab.delta[0] - ref)) < 1e-8
        # the sharp edge makes |delta_l| oscillate just past l ~ kR
        _assert_table_invariants(tab, monotone_tail=False)
        assert abs(_unitarity_gap(tab)) < 1e-8


@pytest.mark.parametrize("depth_K, k", [(300.0, 1e11), (300.0, 3e9), (50.0, 1e10)])
def test_square_well_all_partial_waves(na_ar, depth_K, k):
    sw = SquareWell(depth_K * K_B, 3e-10)
    tab = phase_shifts(sw, na_ar, k)
    exact = _square_well_exact(sw, k, na_ar.reduced_mass, tab.l_max)
    assert np.max(np.abs(wrap_phase(tab.delta - exact))) < 1e-8


def test_contact_model_phase(na_ar):
    a = 5e-15
    k = 1e11
    tab = phase_shifts(ScatteringLength(a), na_ar, k)
    assert tab.delta[0] == pytest.approx(-math.atan(k * a), rel=1e-15)
    assert np.all(tab.delta[1:] == 0.0)
    f = forward_amplitude(tab)
    # leading order -a (1 - i k a)
    assert f.re == pytest.approx(-a, rel=1e-6)
    assert f.im == pytest.approx(k * a * a, rel=1e-6)


def test_contact_amplitude_matches_table(na_ar):
    a = -3e-9
    for k in (1e7, 1e8, 1e9):
        f = forward_amplitude(phase_shifts(ScatteringLength(a), na_ar, k)).value
        assert ContactAmplitude(a)(k) == pytest.approx(f, rel=1e-13)


def test_lennard_jones_table(lj_table, na_ar):
    edge = na_ar.k_relative(1000.0) * LJ.r_m
    assert lj_table.method == "numerov"
    assert edge < lj_table.l_max < 100 * edge
    assert np.all(np.abs(lj_table.delta[-5:]) < 1e-6)
    _assert_table_invariants(lj_table)
    assert abs(_unitarity_gap(lj_table)) < 1e-8
    assert lj_table.diagnostics["steps"] > 0


def test_lennard_jones_step_halving(lj_table, na_ar):
    fine = phase_shifts(LJ, na_ar, na_ar.k_relative(1000.0), steps_per_wavelength=96)
    n = min(fine.l.size, lj_table.l.size)
    assert np.max(np.abs(wrap_phase(fine.delta[:n] - lj_table.delta[:n]))) < 1e-8


def test_square_well_step_halving(na_ar):
    sw = SquareWell(300 * K_B, 3e-10)
    k = 3e9
    a = phase_shifts(sw, na_ar, k)
    b = phase_shifts(sw, na_ar, k, steps_per_wavelength=96)
    n = min(a.l.size, b.l.size)
    assert np.max(np.abs(wrap_phase(a.delta[:n] - b.delta[:n]))) < 1e-8


def test_domain_errors(na_ar):
    with pytest.raises(DomainError):
        phase_shifts(LJ, na_ar, 0.0)
    with pytest.raises(DomainError):
        phase_shifts(LJ, na_ar, -1.0)
    with pytest.raises(UnsupportedPotentialError):
        phase_shifts(object(), na_ar, 1e10)
    with pytest.raises(DomainError):
        forward_amplitude(PhaseShiftTable(1e10, np.array([], int), np.array([]), "analytic"))
    with pytest.raises(DomainError):
        total_cross_section_optical(ComplexAmplitude(1.0, 1.0, 0.0))


def test_single_swave_amplitude():
    d = 0.37
    k = 2e10
    f = forward_amplitude(PhaseShiftTable(k, np.array([0]), np.array([d]), "analytic"))
    expected = np.exp(1j * d) * np.sin(d) / k
    assert f.value == pytest.approx(expected, rel=1e-15)


def test_zero_phases_give_zero_amplitude():
    f = forward_amplitude(PhaseShiftTable(1e10, np.arange(10), np.zeros(10), "analytic"))
    assert f.re == 0.0 and f.im == 0.0
    assert total_cross_section_optical(ComplexAmplitude(1e-9, 0.0, 1e10)) == 0.0


def test_optical_theorem_swave_limit():
    a, k = 4e-10, 1e5
    assert total_cross_section_optical(ComplexAmplitude(-a, k * a * a, k)) == pytest.approx(4 * math.pi * a * a)


@given(st.integers(0, 500), st.floats(1e9, 1e12))
def test_semiclassical_phase_scaling(l, k):
    s = CollisionSystem(ParticleSpecies.from_amu("Na", 23), ParticleSpecies.from_amu("Ar", 40))
    d1 = semiclassical_phase_shift_c6(C6_NA_AR, s, k, l)
    # doubling (l + 1/2) divides by 32
    assert semiclassical_phase_shift_c6(C6_NA_AR, s, k, 2 * l + 0.5) == pytest.approx(d1 / 32, rel=1e-12)
    assert semiclassical_phase_shift_c6(3 * C6_NA_AR, s, k, l) == pytest.approx(3 * d1, rel=1e-12)


def test_semiclassical_phase_formula(na_ar):
    k, l = 2e11, 40
    expected = 3 * math.pi / 16 * na_ar.reduced_mass * C6_NA_AR * k**4 / (HBAR**2 * (l + 0.5) ** 5)
    assert semiclassical_phase_shift_c6(C6_NA_AR, na_ar, k, l) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(DomainError):
        semiclassical_phase_shift_c6(C6_NA_AR, na_ar, 0.0, 1)
    with pytest.raises(DomainError):
        semiclassical_phase_shift_c6(C6_NA_AR, na_ar, 1e10, -1)


@pytest.mark.parametrize("v", [300.0, 700.0, 1000.0, 2000.0, 3000.0])
def test_semiclassical_sum_reproduces_closed_form(na_ar, v):
    tab = phase_shifts(PureC6(C6_NA_AR), na_ar, na_ar.k_relative(v))
    assert tab.method == "semiclassical_c6"
    _assert_table_invariants(tab)
    sigma = partial_wave_cross_section(tab)
    assert sigma == pytest.approx(msv_cross_section(C6_NA_AR, v), rel=1e-2)
    assert abs(_unitarity_gap(tab)) < 1e-8


def test_msv_closed_form():
    c6 = c6_au_to_si(1.47)
    assert c6 == pytest.approx(1.407e-79, rel=1e-3)
    assert msv_cross_section(c6, 1000.0) == pytest.approx(5.7e-19, rel=1e-2)
    assert msv_cross_section(c6, 1000.0) == 8.08 * (c6 / (HBAR * 1000.0)) ** 0.4
    assert msv_cross_section(c6, 32 * 700.0) == pytest.approx(msv_cross_section(c6, 700.0) / 4, rel=1e-14)
    assert msv_cross_section(2**2.5 * c6, 700.0) == pytest.approx(2 * msv_cross_section(c6, 700.0), rel=1e-14)
    with pytest.raises(DomainError):
        msv_cross_section(c6, 0.0)
    with pytest.raises(DomainError):
        msv_cross_section(0.0, 1.0)


def test_partial_wave_amplitude_vectorizes(na_ar):
    amp = PartialWaveAmplitude(PureC6(C6_NA_AR), na_ar)
    ks = na_ar.k_relative(np.array([500.0, 1000.0]))
    vals = amp(ks)
    assert vals.shape == (2,)
    assert vals[1] == amp(float(ks[1]))


def test_tabulated_amplitude_on_smooth_model(na_ar):
    amp = ContactAmplitude(2e-9)
    tab = TabulatedAmplitude(amp, 1e7, 1e10)
    ks = np.geomspace(1e7, 1e10, 300)
    assert np.max(np.abs(tab(ks) - amp(ks)) / np.abs(amp(ks))) < 1e-9
    # held constant outside the table
    assert tab(1e6) == pytest.approx(tab(1e7), rel=1e-12)
    with pytest.raises(DomainError):
        TabulatedAmplitude(amp, 1e10, 1e7)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwindex.constants import A0, AMU, HBAR, K_B, CollisionSystem, ParticleSpecies, c6_au_to_si
from mwindex.errors import DomainError
from mwindex.potentials import LennardJones, PureC6, ScatteringLength
from mwindex.refindex import (
    GasSample,
    beam_effective_cross_section,
    index_corrected,
    index_fixed_centers,
    index_fizeau_legacy,
    index_forrey,
    index_neutron,
    magnitude_coefficient,
    magnitude_estimate_im,
    magnitude_estimate_im_wavevector,
    optics_index,
    rho_ratio,
    transmission_beer_lambert,
    transmission_wave,
    validity_check,
    with_validity,
)
from mwindex.scattering import ConstantAmplitude, ContactAmplitude, forward_amplitude, msv_cross_section, phase_shifts
from mwindex.thermal import DeltaRest, MaxwellBoltzmann, mean_relative_speed

C6 = c6_au_to_si(185.0)
N_MTORR = 3.2e19


def _cold(system, v_p, ratio=1e-6):
    # Maxwell-Boltzmann law with alpha = ratio * v_p
    alpha = ratio * v_p
    return MaxwellBoltzmann(1.0, 2 * K_B / alpha**2)


@pytest.fixture(scope="module")
def c6_sample(argon):
    return GasSample(argon, N_MTORR, MaxwellBoltzmann(300.0, argon.mass), PureC6(C6))


def test_sodium_argon_magnitude(na_ar, c6_sample):
    res = index_corrected(na_ar, c6_sample, 1000.0)
    assert 0.14e-10 < res.n_minus_1.real < 2.49e-10
    assert 0.14e-10 < res.n_minus_1.imag < 2.49e-10
    assert res.quad_error < 1e-7


def test_sodium_argon_at_rest_closed_form(na_ar, argon):
    # targets at rest: Im = n sigma(v_p) / (2 k_p) with the 8.08 law, Re = tan(pi/5) Im
    sample = GasSample(argon, N_MTORR, DeltaRest(), PureC6(C6))
    res = index_corrected(na_ar, sample, 1000.0).n_minus_1
    im = N_MTORR * msv_cross_section(C6, 1000.0) / (2 * na_ar.k_projectile(1000.0))
    assert res.imag == pytest.approx(im, rel=1e-3)
    assert res.real == pytest.approx(math.tan(math.pi / 5) * im, rel=1e-3)


@pytest.mark.parametrize("seed", range(4))
def test_cross_formalism_identity(seed, sodium, argon):
    rng = np.random.default_rng(seed)
    system = CollisionSystem(sodium, ParticleSpecies("X", argon.mass * rng.uniform(0.2, 5.0)))
    sample = GasSample(system.target, 10 ** rng.uniform(17, 21),
                       MaxwellBoltzmann(rng.uniform(5, 600), system.target.mass), PureC6(C6 * rng.uniform(0.3, 3)))
    v_p = rng.uniform(200, 3000)
    im = index_corrected(system, sample, v_p).n_minus_1.imag
    s_eff = beam_effective_cross_section(system, sample, v_p)
    assert im == pytest.approx(sample.n_t * s_eff / (2 * system.k_projectile(v_p)), rel=1e-12)


@pytest.mark.parametrize(
    "potential, v_p",
    [(ScatteringLength(5e-9), 800.0), (PureC6(C6), 800.0), (LennardJones.from_well(8e-22, 5e-10), 400.0)],
)
def test_cold_gas_formulas_coincide(na_ar, argon, potential, v_p):
    sample = GasSample(argon, N_MTORR, _cold(na_ar, v_p), potential)
    values = [fn(na_ar, sample, v_p).n_minus_1 for fn in (index_forrey, index_fizeau_legacy, index_corrected)]
    for z in values[1:]:
        assert abs(z - values[0]) / abs(values[0]) < 1e-9


def test_delta_rest_formulas_coincide(na_ar, argon):
    sample = GasSample(argon, N_MTORR, DeltaRest(), PureC6(C6))
    v_p = 900.0
    ref = index_corrected(na_ar, sample, v_p).n_minus_1
    for fn in (index_forrey, index_fizeau_legacy):
        assert fn(na_ar, sample, v_p).n_minus_1 == pytest.approx(ref, rel=1e-13)


def test_fixed_centers_formula(na_ar):
    k = na_ar.k_projectile(1000.0)
    res = index_fixed_centers(1e-9 + 2e-9j, 1e20, k)
    assert res.n_minus_1 == pytest.approx(2 * math.pi * 1e20 * (1e-9 + 2e-9j) / k**2, rel=1e-15)
    static = CollisionSystem.static_target(na_ar.projectile)
    f = forward_amplitude(phase_shifts(PureC6(C6), static, static.k_relative(1000.0)))
    assert index_fixed_centers(f, 1e20, k).formula == "fixed_centers"
    with pytest.raises(DomainError):
        index_fixed_centers(f, 1e20, 0.0)


def test_zero_amplitude_gives_unit_index(na_ar, c6_sample):
    zero = ConstantAmplitude(0.0)
    for fn in (index_forrey, index_fizeau_legacy, index_corrected):
        assert fn(na_ar, c6_sample, 700.0, amplitude=zero).n_minus_1 == 0


@settings(max_examples=5)
@given(st.floats(1.5, 20.0))
def test_linear_in_density(na_ar, argon, scale):
    base = GasSample(argon, 1e19, MaxwellBoltzmann(300.0, argon.mass), PureC6(C6))
    more = GasSample(argon, scale * 1e19, base.distribution, base.potential)
    for fn in (index_forrey, index_fizeau_legacy, index_corrected):
        assert fn(na_ar, more, 1000.0).n_minus_1 == pytest.approx(scale * fn(na_ar, base, 1000.0).n_minus_1, rel=1e-12)


def test_fizeau_differs_from_corrected_when_warm(na_ar, c6_sample):
    a = index_fizeau_legacy(na_ar, c6_sample, 600.0)
    b = index_corrected(na_ar, c6_sample, 600.0)
    margin = abs(b.n_minus_1) * max(a.quad_error, b.quad_error, 1e-8)
    assert abs(a.n_minus_1 - b.n_minus_1) > 100 * margin


def test_forrey_diverges_from_corrected_for_slow_projectiles(na_ar, c6_sample):
    alpha = c6_sample.distribution.alpha
    ratios = []
    for v_p in (1e-1 * alpha, 1e-2 * alpha, 1e-3 * alpha):
        f = index_forrey(na_ar, c6_sample, v_p).n_minus_1.imag
        c = index_corrected(na_ar, c6_sample, v_p).n_minus_1.imag
        ratios.append(c / f)
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[2] / ratios[1] == pytest.approx(10.0, rel=0.05)


def test_neutron_formula(na_ar):
    a, n, k = 10.3e-15, 1e22, 3e10
    res = index_neutron(a, na_ar, n, k)
    assert res.n_minus_1 == -2 * math.pi * n * na_ar.mass_factor * a / k**2
    assert res.n_minus_1.real < 0 and res.n_minus_1.imag == 0
    with pytest.raises(DomainError):
        index_neutron(a, na_ar, n, 0.0)


def test_corrected_reproduces_neutron_formula(argon):
    neutron = ParticleSpecies("n", 1.00866491595 * AMU)
    nickel = ParticleSpecies.from_amu("Ni", 58.6934)
    system = CollisionSystem(neutron, nickel)
    a, n, v_p = 10.3e-15, 9.1e28, 2200.0
    k = system.k_projectile(v_p)
    expected = index_neutron(a, system, n, k).n_minus_1
    for T in (4.0, 300.0):
        sample = GasSample(nickel, n, MaxwellBoltzmann(T, nickel.mass), ScatteringLength(a))
        got = index_corrected(system, sample, v_p, amplitude=ContactAmplitude(a, leading_order=True)).n_minus_1
        assert got.real == pytest.approx(expected.real, rel=1e-12)
        assert got.imag == 0
    rest = GasSample(nickel, n, DeltaRest(), ScatteringLength(a))
    got = index_corrected(system, rest, v_p, amplitude=ConstantAmplitude(-a)).n_minus_1
    assert got == expected


def test_neutron_real_part_has_no_doppler_shift(sodium):
    neutron = ParticleSpecies("n", 1.00866491595 * AMU)
    nickel = ParticleSpecies.from_amu("Ni", 58.6934)
    system = CollisionSystem(neutron, nickel)
    k = system.k_projectile(2200.0)
    cold = index_neutron(10.3e-15, system, 1e22, k, distribution=MaxwellBoltzmann(4.0, nickel.mass), imaginary=True)
    warm = index_neutron(10.3e-15, system, 1e22, k, distribution=MaxwellBoltzmann(300.0, nickel.mass), imaginary=True)
    assert cold.n_minus_1.real == pytest.approx(warm.n_minus_1.real, rel=1e-12)
    assert warm.n_minus_1.imag > cold.n_minus_1.imag > 0


def test_neutron_imaginary_part_linear_in_mean_k(sodium):
    neutron = ParticleSpecies("n", 1.00866491595 * AMU)
    nickel = ParticleSpecies.from_amu("Ni", 58.6934)
    system = CollisionSystem(neutron, nickel)
    k = system.k_projectile(1.0)
    # v_p << alpha: <k_r> grows as sqrt(T), so four times T nearly doubles it
    cold, warm = MaxwellBoltzmann(75.0, nickel.mass), MaxwellBoltzmann(300.0, nickel.mass)
    lo = index_neutron(1e-14, system, 1e22, k, distribution=cold, imaginary=True)
    hi = index_neutron(1e-14, system, 1e22, k, distribution=warm, imaginary=True)
    mean_ratio = mean_relative_speed(1.0, warm.alpha) / mean_relative_speed(1.0, cold.alpha)
    assert hi.n_minus_1.imag / lo.n_minus_1.imag == pytest.approx(mean_ratio, rel=1e-8)
    assert mean_ratio == pytest.approx(2.0, rel=1e-4)
    at_rest = index_neutron(1e-14, system, 1e22, k, imaginary=True)
    pref = 2 * math.pi * 1e22 * system.mass_factor / k**2
    assert at_rest.n_minus_1.imag == pytest.approx(pref * system.k_relative(1.0) * 1e-28, rel=1e-14)


def test_transmission_wave_limits():
    assert transmission_wave(1e-10, 1e11, 0.0) == (1.0, 0.0)
    assert transmission_wave(1e-10 + 0j, 1e11, 0.3)[0] == 1.0
    T, phase = transmission_wave(1e-10 + 2e-10j, 1e11, 0.01)
    assert T == pytest.approx(math.exp(-2 * 2e-10 * 1e11 * 0.01), rel=1e-15)
    assert phase == pytest.approx(1e-10 * 1e11 * 0.01, rel=1e-15)
    with pytest.raises(DomainError):
        transmission_wave(0j, 1e11, -1.0)


def test_wave_and_beer_lambert_agree(na_ar, c6_sample):
    v_p, L = 1000.0, 0.01
    n1 = index_corrected(na_ar, c6_sample, v_p).n_minus_1
    T_wave, _ = transmission_wave(n1, na_ar.k_projectile(v_p), L)
    T_bl = transmission_beer_lambert(c6_sample, na_ar, v_p, L)
    assert T_wave == pytest.approx(T_bl, rel=1e-8)


def test_beer_lambert_exponential_form(na_ar, argon):
    sigma = lambda v: 3e-18 * (v / 1000.0) ** -0.4
    rest = GasSample(argon, 1e19, DeltaRest(), PureC6(C6))
    assert transmission_beer_lambert(rest, na_ar, 800.0, 0.02, sigma=sigma) == pytest.approx(
        math.exp(-1e19 * sigma(800.0) * 0.02), rel=1e-14
    )
    assert transmission_beer_lambert(rest, na_ar, 800.0, 0.02, sigma=lambda v: 0.0) == 1.0
    warm = GasSample(argon, 1e19, MaxwellBoltzmann(300.0, argon.mass), PureC6(C6))
    t1 = math.log(transmission_beer_lambert(warm, na_ar, 800.0, 0.01, sigma=sigma))
    t3 = math.log(transmission_beer_lambert(warm, na_ar, 800.0, 0.03, sigma=sigma))
    assert t3 == pytest.approx(3 * t1, rel=1e-12)


@pytest.mark.parametrize("v_p", [500.0, 1000.0, 2000.0, 5000.0])
def test_rho_constant_for_cold_gas(na_ar, v_p):
    rho = rho_ratio(na_ar, PureC6(C6), v_p, _cold(na_ar, v_p, 1e-3))
    assert rho == pytest.approx(0.7265, rel=0.005)
    assert rho == pytest.approx(math.tan(math.pi / 5), rel=1e-4)


def test_rho_needs_c6(na_ar):
    with pytest.raises(DomainError):
        rho_ratio(na_ar, ScatteringLength(1e-9), 1000.0, DeltaRest())


def test_optics_anchors():
    ratio = optics_index(1.0, 11.9)
    assert ratio == pytest.approx(1.1e-29, rel=0.03)
    assert optics_index(2.55e25, 11.9) == pytest.approx(2.8e-4, rel=0.03)
    assert optics_index(2.55e25, 0.0) == 0.0
    assert ratio == pytest.approx(2 * math.pi * A0**3 * 11.9, rel=1e-15)


def test_matter_wave_magnitude(sodium):
    est = magnitude_estimate_im(185.0, sodium.mass, 1000.0)
    assert 0.4e-30 < est < 8e-30
    wave = magnitude_estimate_im_wavevector(c6_au_to_si(185.0), sodium.mass, 1000.0)
    assert est == pytest.approx(wave, rel=1e-2)
    assert magnitude_coefficient() == pytest.approx(4.12e-3, rel=1e-2)
    assert magnitude_estimate_im(185.0, sodium.mass, 500.0) / est == pytest.approx(2**1.4, rel=1e-12)


def test_wavevector_estimate_matches_cold_corrected_index(sodium):
    # heavy cold targets: the corrected index reduces to the closed form
    heavy = ParticleSpecies("heavy", 1e6 * sodium.mass)
    system = CollisionSystem(sodium, heavy)
    sample = GasSample(heavy, 1.0, DeltaRest(), PureC6(C6))
    im = index_corrected(system, sample, 1000.0).n_minus_1.imag
    assert im == pytest.approx(magnitude_estimate_im_wavevector(C6, sodium.mass, 1000.0), rel=2e-3)


def test_validity_one_millitorr_run(na_ar, c6_sample):
    res = with_validity(index_corrected(na_ar, c6_sample, 1000.0), c6_sample, na_ar, 1000.0)
    report = res.diagnostics
    assert report.passed
    assert report.spacing == pytest.approx(N_MTORR ** (-1 / 3), rel=1e-14)
    assert report.spacing > 3e-7
    # at 1e19 m^-3 the spacing is just under half a micron
    sparse = GasSample(c6_sample.species, 1e19, c6_sample.distribution, c6_sample.potential)
    assert validity_check(sparse, na_ar, 1000.0).spacing == pytest.approx(4.64e-7, rel=1e-3)


def test_validity_flags_trip(na_ar, argon):
    dense = GasSample(argon, 1e30, DeltaRest(), PureC6(C6))
    report = validity_check(dense, na_ar, 1000.0)
    assert not report.range_ok
    slow = GasSample(argon, 1e25, DeltaRest(), PureC6(C6))
    assert not validity_check(slow, na_ar, 1e-4).wavelength_ok
    res = index_corrected(na_ar, GasSample(argon, 1e28, DeltaRest(), PureC6(C6)), 1000.0)
    assert not validity_check(slow, na_ar, 1000.0, res).mean_field_ok


def test_speed_must_be_positive(na_ar, c6_sample):
    for fn in (index_forrey, index_fizeau_legacy, index_corrected):
        with pytest.raises(DomainError):
            fn(na_ar, c6_sample, 0.0)
    with pytest.raises(DomainError):
        GasSample(c6_sample.species, 0.0, DeltaRest(), PureC6(C6))

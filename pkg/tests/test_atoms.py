import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plasmonprobe import units
from plasmonprobe.atoms import (
    AtomicMedium,
    AtomicTransition,
    ExponentialProfile,
    GaussianProfile,
    TabulatedProfile,
    UniformSlab,
    absorption_factor,
    density_at,
    dispersion_factor,
    load_tabulated_profile,
    lorentzian,
    polarizability_factor,
    refractive_index,
)

detuning = st.floats(-1e4, 1e4)
density = st.floats(0.0, 1e20)


def test_strength_value():
    assert AtomicTransition().strength == pytest.approx(3 * (780e-9) ** 3 / (8 * math.pi**2), rel=1e-15)
    assert AtomicTransition().strength == pytest.approx(1.8033e-20, rel=1e-4)


def test_index_reference_point():
    n = refractive_index(AtomicMedium(-30.0, 1e19))
    assert n.real == pytest.approx(1 - 3.0043e-3, rel=1e-6)
    assert n.imag == pytest.approx(3 * (780e-9) ** 3 / (8 * math.pi**2) * 1e19 / 3601, rel=1e-14)


@given(d=detuning, rho=density)
def test_dispersive_part_is_odd_and_absorptive_part_even(d, rho):
    plus, minus = AtomicMedium(d, rho), AtomicMedium(-d, rho)
    assert polarizability_factor(plus) == -polarizability_factor(minus)
    assert refractive_index(plus).real - 1 == pytest.approx(-(refractive_index(minus).real - 1), abs=1e-15)
    assert refractive_index(plus).imag == refractive_index(minus).imag
    assert refractive_index(plus).imag >= 0


def test_negative_detuning_lowers_index():
    assert refractive_index(AtomicMedium(-5.0, 1e18)).real < 1 < refractive_index(AtomicMedium(5.0, 1e18)).real


def test_line_shapes():
    m = AtomicMedium(0.5, 1.0)  # 2δ/Γ = 1
    assert dispersion_factor(m) == pytest.approx(0.5)
    assert lorentzian(m) == pytest.approx(0.5)
    x = np.linspace(-20, 20, 40001)
    values = x / (1 + x * x)
    assert x[np.argmax(values)] == pytest.approx(1.0, abs=1e-3)
    assert polarizability_factor(m) == pytest.approx(m.transition.strength * 0.5)
    assert absorption_factor(AtomicMedium(0.0, 1.0)) == pytest.approx(m.transition.strength)


def test_absorption_switch():
    n = refractive_index(AtomicMedium(3.0, 1e18, absorption=False))
    assert n.imag == 0
    assert n.real == refractive_index(AtomicMedium(3.0, 1e18)).real


def test_zero_density_is_vacuum():
    assert refractive_index(AtomicMedium(1.0, 0.0)) == 1.0


def test_medium_validation_and_constructors():
    with pytest.raises(ValueError):
        AtomicMedium(0.0, -1.0)
    with pytest.raises(ValueError):
        AtomicTransition(wavelength=0.0)
    m = AtomicMedium.from_angular_detuning(-2 * math.pi * 180e6, 1e18)
    assert m.detuning == pytest.approx(-30.0)
    assert m.angular_detuning == pytest.approx(-2 * math.pi * 180e6)
    assert m.with_detuning(2.0).scaled_detuning == 4.0
    assert m.with_density(5.0).density == 5.0


def test_profiles():
    slab = UniformSlab(100e-9, 2e18, 50e-9)
    assert density_at(slab, 120e-9) == 2e18
    assert density_at(slab, 160e-9) == 0
    assert density_at(slab, 50e-9) == 0
    exp = ExponentialProfile(1e18, 200e-9, 10e-9)
    assert density_at(exp, 210e-9) == pytest.approx(1e18 / math.e)
    assert density_at(exp, 5e-9) == 0
    gauss = GaussianProfile(1e18, 300e-9, 50e-9)
    assert density_at(gauss, 350e-9) == pytest.approx(1e18 * math.exp(-0.5))
    assert gauss.breakpoints() == (300e-9,)
    with pytest.raises(ValueError):
        density_at(slab, -1e-9)
    with pytest.raises(ValueError):
        TabulatedProfile((0.0, 0.0), (1.0, 1.0))


def test_tabulated_profile_file(tmp_path):
    path = tmp_path / "profile.txt"
    path.write_text("# z_nm rho_cm3\n0 0\n100 1e12\n300 0\n")
    profile = load_tabulated_profile(path)
    assert density_at(profile, 50e-9) == pytest.approx(0.5e18)
    assert density_at(profile, 400e-9) == 0
    assert profile.peak_density == pytest.approx(1e18)


@given(x=st.floats(1e-30, 1e30))
def test_unit_round_trips(x):
    pairs = [
        (units.nm_to_m, units.m_to_nm),
        (units.um_to_m, units.m_to_um),
        (units.deg_to_rad, units.rad_to_deg),
        (units.cm3_to_m3, units.m3_to_cm3),
        (units.mhz_to_angular, units.angular_to_mhz),
        (lambda v: units.mhz_to_gamma(v, 6.0), lambda v: units.gamma_to_mhz(v, 6.0)),
    ]
    for fwd, back in pairs:
        assert back(fwd(x)) == pytest.approx(x, rel=1e-12)
        assert fwd(back(x)) == pytest.approx(x, rel=1e-12)


def test_unit_values():
    assert units.cm3_to_m3(1e13) == 1e19
    assert units.mhz_to_angular(6.0) == pytest.approx(2 * math.pi * 6e6)
    assert units.mhz_to_gamma(-180.0, 6.0) == -30.0

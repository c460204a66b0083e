import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plasmonprobe.atoms import AtomicMedium, UniformSlab, refractive_index
from plasmonprobe.cloud import (
    BeamModel,
    CloudModel,
    detected_atoms_in_slice,
    overlap_average_factor,
    slice_atoms_from_map,
    slice_thickness,
)
from plasmonprobe.errors import NotEvanescentError
from plasmonprobe.imaging import blur, dispersive_image, gaussian_density_map
from plasmonprobe.metrics import atom_stack, delta_R_exact, delta_R_profile
from plasmonprobe.optics import reflectivity
from plasmonprobe.spectra import SpectrumScenario, ZbTable, fit_dispersive_width, spectrum
from plasmonprobe.traces import (
    Trace,
    fit_gaussian_peak,
    gaussian_trace,
    lowpass,
    shot_noise_rms,
    synthesize_time_trace,
)

CLOUD_RADII = (50e-6, 155e-6, 50e-6)
PROBE_BEAM = BeamModel((146e-6, 111e-6))


# --- spectra ----------------------------------------------------------------


def test_scenario_validation():
    with pytest.raises(ValueError):
        SpectrumScenario((0.0, 0.0), 100e-9)
    with pytest.raises(ValueError):
        SpectrumScenario((0.0, 1.0), 100e-9, plateau_amplitude=1.2)
    with pytest.raises(ValueError):
        ZbTable((1.0, 0.0), (1e-7, 2e-7))


def test_zb_table_interpolates():
    table = ZbTable((-5.0, 0.0, 5.0), (1.5e-6, 500e-9, 1.5e-6))
    assert table(-2.5) == pytest.approx(1e-6)
    assert table(10.0) == 1.5e-6


def test_linear_regime_has_dispersive_shape(kretschmann):
    theta = math.radians(43.3)
    grid = np.linspace(-8, 8, 33)
    s = spectrum(SpectrumScenario(grid, 200e-9), kretschmann, AtomicMedium(0.0, 1e12, absorption=False), theta)
    x = 2 * grid
    shape = x / (1 + x * x)
    ratio = s.delta_r[shape != 0] / shape[shape != 0]
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-6)


def test_full_plateau_suppresses_center(kretschmann, theta_sp):
    grid = (-1.0, 0.0, 1.0)
    s = spectrum(SpectrumScenario(grid, 500e-9, 1.0, 0.8), kretschmann, AtomicMedium(0.0, 1e17), theta_sp)
    assert s.delta_r[1] == 0.0
    assert s.delta_r[0] != 0.0


@given(d=st.floats(0.05, 20.0))
def test_spectrum_antisymmetry_without_absorption(kretschmann, d):
    theta = math.radians(43.3)
    medium = AtomicMedium(0.0, 1e10, absorption=False)
    s = spectrum(SpectrumScenario((-d, d), 300e-9), kretschmann, medium, theta)
    assert s.delta_r[0] == pytest.approx(-s.delta_r[1], rel=1e-6)


def test_absorption_breaks_antisymmetry(kretschmann):
    # the absorptive part of the index is even in δ, so it survives ΔR(δ) + ΔR(-δ)
    theta = math.radians(43.3)
    s = spectrum(SpectrumScenario((-1.0, 1.0), 300e-9), kretschmann, AtomicMedium(0.0, 1e10), theta)
    residue = abs(s.delta_r[0] + s.delta_r[1]) / abs(s.delta_r[1])
    assert residue > 1e-3


def test_single_point_spectrum_equals_scalar(kretschmann, theta_sp):
    medium = AtomicMedium(0.0, 5e17)
    s = spectrum(SpectrumScenario((-2.5,), 500e-9), kretschmann, medium, theta_sp)
    assert s.delta_r[0] == float(delta_R_exact(kretschmann, medium.with_detuning(-2.5), 500e-9, theta_sp))


def test_spectrum_uses_zb_policy_and_cloud_density(kretschmann, theta_sp):
    table = ZbTable((-5.0, 5.0), (400e-9, 600e-9))
    cloud = CloudModel(CLOUD_RADII, 2e17)
    s = spectrum(SpectrumScenario((0.0,), table), kretschmann, AtomicMedium(0.0, 1.0), theta_sp, cloud=cloud)
    assert s.z_b[0] == pytest.approx(500e-9)
    expected = float(delta_R_exact(kretschmann, AtomicMedium(0.0, 2e17), 500e-9, theta_sp))
    assert s.delta_r[0] == pytest.approx(expected, rel=1e-14)


def test_dispersive_fit_recovers_parameters():
    d = np.linspace(-10, 10, 301)
    u = 2 * d / 1.7
    y = (3e-4 * u - 1e-4) / (1 + u * u) + 2e-6
    fit = fit_dispersive_width(d, y)
    assert fit.width == pytest.approx(1.7, rel=1e-8)
    assert fit.dispersive == pytest.approx(3e-4, rel=1e-8)
    assert fit.absorptive == pytest.approx(-1e-4, rel=1e-8)


def test_density_broadens_fitted_width(kretschmann, theta_sp):
    grid = np.linspace(-10, 10, 201)
    widths = []
    for rho in (1e16, 5e17):
        s = spectrum(SpectrumScenario(grid, 500e-9), kretschmann, AtomicMedium(0.0, rho), theta_sp)
        widths.append(fit_dispersive_width(s.detunings, s.delta_r).width)
    assert widths[0] == pytest.approx(1.0, rel=0.02)
    assert widths[1] > widths[0]


# --- traces -----------------------------------------------------------------


def test_noiseless_trace_round_trip():
    trace = gaussian_trace(2.3e-4, 394e-6, 1e5, 0.0, center=1.7e-3, offset=1e-5)
    fit = fit_gaussian_peak(trace)
    assert fit.height == pytest.approx(2.3e-4, rel=1e-9)
    assert fit.center == pytest.approx(1.7e-3, rel=1e-9)
    assert fit.width == pytest.approx(394e-6, rel=1e-9)
    assert fit.offset == pytest.approx(1e-5, rel=1e-9)


def test_trace_has_noise_tail():
    trace = gaussian_trace(1.0, 1e-4, 1e5, 0.1, rng=1)
    assert trace.t[-1] - trace.tail_start >= 4e-3 - 1e-12
    assert trace.tail.size >= 400


def test_crossing_time_sets_width(kretschmann):
    cloud = CloudModel(CLOUD_RADII, 4.8e17, velocity_z=0.127)
    assert cloud.crossing_time == pytest.approx(393.7e-6, rel=1e-3)
    trace = synthesize_time_trace(cloud, PROBE_BEAM, kretschmann, AtomicMedium(-30, 0.0), 100e-9, 0.75, 2e5)
    fit = fit_gaussian_peak(trace)
    assert fit.width == pytest.approx(cloud.crossing_time, rel=1e-9)
    expected = float(delta_R_exact(kretschmann, AtomicMedium(-30, 4.8e17), 100e-9, 0.75))
    assert fit.height == pytest.approx(expected / overlap_average_factor(cloud, PROBE_BEAM), rel=1e-9)


def test_doubling_noise_halves_snr():
    ratios = []
    for seed in range(100):
        a = fit_gaussian_peak(gaussian_trace(50.0, 4e-4, 1e5, 1.0, rng=seed)).snr
        b = fit_gaussian_peak(gaussian_trace(50.0, 4e-4, 1e5, 2.0, rng=seed + 1000)).snr
        ratios.append(b / a)
    assert np.mean(ratios) == pytest.approx(0.5, rel=0.03)


def test_injected_snr_is_recovered():
    snr = np.array([fit_gaussian_peak(gaussian_trace(100.0, 4e-4, 1e5, 1.0, rng=s)).snr for s in range(100)])
    assert np.mean((snr >= 85) & (snr <= 115)) >= 0.95


def test_flat_trace():
    t = np.arange(1000) * 1e-5
    fit = fit_gaussian_peak(Trace(t, np.zeros_like(t), 5e-3))
    assert fit.height == 0 and fit.snr == 0


def test_seeded_traces_are_reproducible():
    a = gaussian_trace(1.0, 1e-4, 1e5, 0.3, rng=7).signal
    b = gaussian_trace(1.0, 1e-4, 1e5, 0.3, rng=7).signal
    np.testing.assert_array_equal(a, b)


def test_lowpass_filter():
    fs = 1e5
    step = lowpass(np.ones(5000), fs, 1e4)
    assert step[-1] == pytest.approx(1.0, rel=1e-12)
    t = np.arange(200000) / fs
    tone = lowpass(np.sin(2 * np.pi * 1e4 * t), fs, 1e4)[100000:]
    gain = np.sqrt(2) * np.std(tone)
    # the discrete single pole is -3 dB at cutoff only for cutoff << fs
    assert 0.5 < gain < 0.8


def test_shot_noise_mode(kretschmann):
    cloud = CloudModel(CLOUD_RADII, 1e17, velocity_z=0.127)
    trace = synthesize_time_trace(
        cloud, PROBE_BEAM, kretschmann, AtomicMedium(-30, 0.0), 100e-9, 0.75, 1e5,
        seed=3, noise="shot", photons_per_sample=1e10,
    )
    r = float(reflectivity(atom_stack(kretschmann, refractive_index(AtomicMedium(-30, 1e17)), 100e-9), 0.75))
    # about 400 tail samples: the sample std is within 10% of the floor
    assert np.std(trace.tail, ddof=1) == pytest.approx(shot_noise_rms(r, 1e10), rel=0.1)
    with pytest.raises(ValueError):
        shot_noise_rms(0.5, 0.0)


# --- cloud geometry ---------------------------------------------------------


def test_overlap_factor_closed_form():
    cloud = CloudModel(CLOUD_RADII, 1e17)
    expected = math.sqrt(1 + (146 / 50) ** 2) * math.sqrt(1 + (111 / 155) ** 2)
    assert overlap_average_factor(cloud, PROBE_BEAM) == pytest.approx(expected, rel=1e-10)


def test_overlap_factor_limits():
    cloud = CloudModel(CLOUD_RADII, 1e17)
    assert overlap_average_factor(cloud, BeamModel((0.5e-6, 0.5e-6))) == pytest.approx(1.0, abs=1e-3)
    widths = np.geomspace(10e-6, 5e-3, 12)
    values = [overlap_average_factor(cloud, BeamModel((w, w))) for w in widths]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert values[-1] > 100


def test_cloud_atom_number_check():
    with pytest.warns(UserWarning):
        CloudModel(CLOUD_RADII, 1e17, atom_number=1.0)
    cloud = CloudModel.from_atom_number(CLOUD_RADII, 368000)
    assert cloud.implied_atom_number == pytest.approx(368000)
    with pytest.raises(ValueError):
        CloudModel((1e-6, 0.0, 1e-6), 1.0)
    with pytest.raises(ValueError):
        BeamModel((1e-6,))


def test_detected_atoms_monte_carlo(kretschmann):
    theta = math.radians(43.0)
    cloud = CloudModel(CLOUD_RADII, 4.8e17)
    n_det, length = detected_atoms_in_slice(cloud, kretschmann, theta)
    rng = np.random.default_rng(0)
    half = 3 * np.array(CLOUD_RADII[:2])
    pts = rng.uniform(-half, half, size=(1_000_000, 2))
    area = 4 * half[0] * half[1]
    mc = np.mean(cloud.density(pts[:, 0], pts[:, 1])) * area * length
    assert n_det == pytest.approx(mc, rel=5e-3)


def test_detected_atoms_edge_cases(kretschmann):
    theta = math.radians(43.0)
    assert detected_atoms_in_slice(CloudModel(CLOUD_RADII, 0.0), kretschmann, theta)[0] == 0
    with pytest.raises(NotEvanescentError):
        slice_thickness(kretschmann, math.radians(30.0))
    # a uniform transverse map counts rho * A * l
    length = slice_thickness(kretschmann, theta)
    assert slice_atoms_from_map(np.full((10, 20), 2e17), 1e-6, length) == pytest.approx(2e17 * 200e-12 * length)


def _reference_slice_geometry(kretschmann):
    """Angle at which 1/kappa equals 587 nm and the reference cloud after 20% loss."""
    n1 = kretschmann.layers[0].n.real
    q = 1 / (587e-9 * kretschmann.k0)
    theta = math.asin(math.sqrt(1 + q * q) / n1)
    return theta, CloudModel.from_atom_number(CLOUD_RADII, 460000 * 0.8)


def test_reference_slice_count_is_plausible(kretschmann):
    theta, cloud = _reference_slice_geometry(kretschmann)
    n_det, length = detected_atoms_in_slice(cloud, kretschmann, theta)
    assert length == pytest.approx(587e-9, rel=1e-12)
    assert 9000 / 3 < n_det < 9000 * 3


@pytest.mark.xfail(strict=True, reason="peak density unstated; this geometry gives about 3400 atoms")
def test_reference_slice_count_within_factor_two(kretschmann):
    theta, cloud = _reference_slice_geometry(kretschmann)
    n_det, _ = detected_atoms_in_slice(cloud, kretschmann, theta)
    assert 9000 / 2 < n_det < 9000 * 2


# --- images -----------------------------------------------------------------


def test_zero_map_gives_zero_image(kretschmann):
    img = dispersive_image(np.zeros((4, 5)), kretschmann, AtomicMedium(-30, 0.0), 100e-9, 0.75)
    assert not img.any()


def test_uniform_map_gives_uniform_image(kretschmann):
    medium = AtomicMedium(-30, 0.0)
    img = dispersive_image(np.full((6, 7), 3e16), kretschmann, medium, 100e-9, 0.75)
    scalar = delta_R_profile(kretschmann, medium, UniformSlab(100e-9, 3e16), 0.75)
    np.testing.assert_allclose(img, scalar, rtol=1e-12)
    blurred = dispersive_image(np.full((6, 7), 3e16), kretschmann, medium, 100e-9, 0.75, 4e-6, 12e-6)
    np.testing.assert_allclose(blurred, scalar, rtol=1e-12)


def test_center_pixel_spectrum_matches_scalar(kretschmann, theta_sp):
    cloud = CloudModel(CLOUD_RADII, 4.8e17)
    density = gaussian_density_map(cloud, (9, 9), 10e-6)
    center = density[4, 4]
    assert center == cloud.peak_density
    for d in np.linspace(-5, 5, 11):
        medium = AtomicMedium(d, 0.0)
        img = dispersive_image(density, kretschmann, medium, 500e-9, theta_sp, method="exact")
        scalar = float(delta_R_exact(kretschmann, medium.with_density(center), 500e-9, theta_sp))
        assert img[4, 4] == pytest.approx(scalar, rel=1e-10)
        lin = dispersive_image(density, kretschmann, medium, 500e-9, theta_sp + 0.01)
        scalar_lin = delta_R_profile(kretschmann, medium, UniformSlab(500e-9, center), theta_sp + 0.01)
        assert lin[4, 4] == pytest.approx(scalar_lin, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("method", ["linear", "exact"])
def test_image_is_pixelwise_local(kretschmann, method):
    rng = np.random.default_rng(4)
    density = rng.uniform(0, 1e17, size=(5, 6))
    perm = rng.permutation(density.size)
    medium = AtomicMedium(-30, 0.0)
    img = dispersive_image(density, kretschmann, medium, 100e-9, 0.75, method=method)
    permuted = dispersive_image(density.ravel()[perm].reshape(5, 6), kretschmann, medium, 100e-9, 0.75, method=method)
    np.testing.assert_array_equal(permuted.ravel(), img.ravel()[perm])


def test_blur_kernel_has_requested_fwhm():
    impulse = np.zeros((201, 201))
    impulse[100, 100] = 1.0
    out = blur(impulse, 1e-6, 12e-6)
    profile = out[100] / out[100].max()
    x = np.arange(201) - 100
    above = x[profile >= 0.5]
    assert above.max() - above.min() + 1 == pytest.approx(12, abs=1.5)
    assert out.sum() == pytest.approx(1.0, rel=1e-12)


def test_image_validation(kretschmann):
    medium = AtomicMedium(-30, 0.0)
    with pytest.raises(ValueError):
        dispersive_image(np.full((2, 2), -1.0), kretschmann, medium, 100e-9, 0.75)
    with pytest.raises(ValueError):
        dispersive_image(np.ones((2, 2)), kretschmann, medium, 100e-9, 0.75, resolution=12e-6)
    with pytest.raises(ValueError):
        dispersive_image(np.ones((2, 2)), kretschmann, medium, 100e-9, 0.75, method="fdtd")

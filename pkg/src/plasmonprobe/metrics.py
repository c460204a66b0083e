"""Reflectivity change, shot-noise SNR, absorbed-photon budget and QND atom number.

The bare stack passed to these functions is the solid system without atoms
(e.g. glass/gold/vacuum); its last layer is the gap medium. Atoms are added
as a layer of index n4 starting a distance ``z_b`` beyond the last interface,
semi-infinite unless ``thickness`` is given.
"""
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .atoms import UniformSlab, dispersion_factor, polarizability_factor, refractive_index
from .errors import NotEvanescentError, QuadratureError
from .minimize import minimize_bracketed
from .optics import (
    Layer,
    LayerStack,
    _kz,
    field_enhancement,
    reflectivity,
    total_matrix,
    vertical_wavenumber,
)


@dataclass(frozen=True)
class ProbeConfig:
    angle: float
    efficiency: float = 1.0
    incident_photons: float = 0.0
    max_absorbed_photons: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("detection efficiency must lie in [0, 1]")
        if self.incident_photons < 0 or self.max_absorbed_photons < 0:
            raise ValueError("photon numbers must be >= 0")
        if not 0.0 <= self.angle < math.pi / 2:
            raise ValueError("incidence angle must lie in [0, pi/2)")


@dataclass(frozen=True)
class DetectionReport:
    R: float
    delta_R: float
    signal: float
    snr: float
    f_N: float
    chi: float
    theta_factor: float
    n_max: float


class PlasmonFactors(NamedTuple):
    theta_factor: float  # Θ from the A-matrix entries
    enhancement: float  # |t|^2 at the metal surface
    kappa: float  # inverse decay length in the gap (1/m)
    k0: float


class SignalNoise(NamedTuple):
    signal: float
    noise: float
    snr: float


class AbsorbedFraction(NamedTuple):
    full: float
    simplified: float


def atom_stack(stack, n4, z_b, thickness=math.inf):
    """Bare stack with a gap of ``z_b`` and an atom layer of index ``n4`` appended."""
    gap = stack.layers[-1].n
    layers = stack.layers[:-1] + (Layer(gap, z_b), Layer(n4, thickness))
    if not math.isinf(thickness):
        layers += (Layer(gap),)
    return LayerStack(layers, stack.wavelength)


def _gap_kappa(stack, theta, strict=True):
    kz = vertical_wavenumber(stack, -1, theta)
    ok = (kz.imag > 0) & (np.abs(kz.real) <= 1e-9 * np.abs(kz))
    if strict and not np.all(ok):
        raise NotEvanescentError("below critical angle: no evanescent wave in the gap")
    return np.where(ok, kz.imag, np.nan)


def plasmon_factors(stack, theta):
    """Θ, |t|² and κ3 of the bare stack.

    Θ is evaluated at the metal surface; for a lossless evanescent gap it does
    not depend on how far the A matrix is propagated into the gap.
    """
    kappa = _gap_kappa(stack, theta)
    a = total_matrix(stack, theta)
    a11, a12, a21, a22 = a[..., 0, 0], a[..., 0, 1], a[..., 1, 0], a[..., 1, 1]
    theta_factor = np.real(a11 * np.conj(a12)) - np.abs(a12) ** 2 / np.abs(a22) ** 2 * np.real(
        a21 * np.conj(a22)
    )
    return PlasmonFactors(theta_factor, 1.0 / np.abs(a22) ** 2, kappa, stack.k0)


def _gap_weight(pf):
    return 1.0 + pf.k0**2 / (2.0 * pf.kappa**2)


def delta_R_exact(stack, medium, z_b, theta, thickness=math.inf):
    """``R(atoms) - R(rho = 0)`` from two full transfer-matrix evaluations."""
    gap = stack.layers[-1].n
    r_atoms = reflectivity(atom_stack(stack, refractive_index(medium), z_b, thickness), theta)
    r_bare = reflectivity(atom_stack(stack, gap, z_b, thickness), theta)
    return r_atoms - r_bare


def reflectivity_density_derivative(stack, medium, z_b, theta):
    """Analytic ∂R/∂ρ at ρ = 0 for a real index shift ``β ρ``."""
    pf = plasmon_factors(stack, theta)
    inv_a22_sq = field_enhancement(stack, theta, z_b)
    return 2.0 * polarizability_factor(medium) * _gap_weight(pf) * inv_a22_sq * pf.theta_factor


def delta_R_linear(stack, medium, z_b, theta):
    """First-order ΔR for a uniform semi-infinite gas beyond ``z_b``.

    Only the dispersive (real) part of the index enters; valid for 2|δ| >> Γ.
    """
    pf = plasmon_factors(stack, theta)
    lam = medium.transition.wavelength
    return (
        3.0 * pf.theta_factor / (4.0 * math.pi**2)
        * pf.enhancement
        * _gap_weight(pf)
        * dispersion_factor(medium)
        * lam**3
        * medium.density
        * np.exp(-2.0 * pf.kappa * z_b)
    )


def weighted_column_density(profile, kappa, epsrel=1e-8, limit=200):
    """``∫ rho(z) exp(-2 kappa z) dz`` by adaptive quadrature."""
    a, b = profile.support()
    if b <= a:
        return 0.0

    # integrate over u = kappa z so that the decay happens on unit scale
    def integrand(u):
        return float(profile(u / kappa)) * math.exp(-2.0 * u)

    kwargs = dict(epsabs=0.0, epsrel=epsrel, limit=limit, full_output=1)
    points = tuple(p * kappa for p in profile.breakpoints())
    if points and math.isfinite(b):
        kwargs["points"] = points
    out = integrate.quad(integrand, a * kappa, b * kappa, **kwargs)
    value, abserr = out[0] / kappa, out[1] / kappa
    if len(out) > 3:
        raise QuadratureError(f"quadrature did not converge: {out[3].splitlines()[0]}", abserr)
    return value


def delta_R_profile(stack, medium, profile, theta, epsrel=1e-8):
    """First-order ΔR for an inhomogeneous density ``profile(z)``."""
    if np.ndim(theta):
        return np.array([delta_R_profile(stack, medium, profile, th, epsrel) for th in np.ravel(theta)]).reshape(
            np.shape(theta)
        )
    pf = plasmon_factors(stack, theta)
    lam = medium.transition.wavelength
    prefactor = (
        3.0 * pf.theta_factor / (2.0 * math.pi**2)
        * pf.enhancement
        * _gap_weight(pf)
        * dispersion_factor(medium)
        * lam**3
        * pf.kappa
    )
    return float(prefactor * weighted_column_density(profile, float(pf.kappa), epsrel))


def signal_and_noise(delta_r, r, probe):
    """Signal ``η ΔR N_in``, shot noise ``sqrt(η R N_in)`` and their ratio.

    ``snr`` is signed like ``delta_r`` and is ``inf`` when ``R = 0``.
    """
    eta, n_in = probe.efficiency, probe.incident_photons
    delta_r, r = np.asarray(delta_r, dtype=float), np.asarray(r, dtype=float)
    signal = eta * delta_r * n_in
    noise = np.sqrt(eta * r * n_in)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.sqrt(eta * n_in / r) * delta_r
    snr = np.where(np.asarray(r) == 0, np.copysign(np.inf, delta_r), snr)
    if np.ndim(snr) == 0:
        return SignalNoise(float(signal), float(noise), float(snr))
    return SignalNoise(signal, noise, snr)


def _atom_kappa(stack, medium, theta):
    n4 = refractive_index(medium)
    k4 = _kz(n4, stack.layers[0].n.real, np.asarray(theta, dtype=float), stack.k0)
    return -1j * k4, n4


def _clip_fraction(f, name):
    f = np.asarray(f, dtype=float)
    if np.any((f < 0) | (f > 1)):
        warnings.warn(f"{name} absorbed fraction outside [0, 1]; clipped", RuntimeWarning, stacklevel=3)
        f = np.clip(f, 0.0, 1.0)
    return f


def _full_fraction(stack, medium, z_b, theta, pf_enhancement):
    kappa4, n4 = _atom_kappa(stack, medium, theta)
    kr, ki = kappa4.real, kappa4.imag
    return pf_enhancement * (2.0 * kr * n4.imag - ki) / stack.k0 * np.exp(-2.0 * kr * z_b), kr


def absorbed_fraction(stack, medium, z_b, theta):
    """Fraction f_N of incident photons absorbed by the gas.

    ``full`` uses the complex inverse decay length κ_r + iκ_i of the atom
    layer; ``simplified`` replaces κ_i by its small-absorption limit, giving a
    pure Lorentzian in δ.
    """
    gap_kappa = _gap_kappa(stack, theta)
    enhancement = field_enhancement(stack, theta, 0.0)
    full, kr = _full_fraction(stack, medium, z_b, theta, enhancement)
    if np.any(kr <= 0):
        raise NotEvanescentError("atom layer is not evanescent at this angle")
    k0 = stack.k0
    n4i = refractive_index(medium).imag
    simplified = enhancement / (gap_kappa / k0) * n4i * np.exp(-2.0 * gap_kappa * z_b)
    full = _clip_fraction(full, "full")
    simplified = _clip_fraction(simplified, "simplified")
    if np.ndim(full) == 0:
        return AbsorbedFraction(float(full), float(simplified))
    return AbsorbedFraction(full, simplified)


def max_incident_photons(stack, medium, z_b, theta, max_absorbed_photons):
    """Largest N_in keeping absorption at ``max_absorbed_photons``; inf without atoms."""
    f = absorbed_fraction(stack, medium, z_b, theta).simplified
    return math.inf if f == 0 else max_absorbed_photons / f


def snr_photon_budget(stack, medium, z_b, theta, efficiency=1.0, max_absorbed_photons=1.0, method="linear"):
    """SNR with the incident photon number set by the absorption budget.

    ``method="linear"`` uses the first-order ΔR and the bare reflectivity
    (the closed-form route); ``"exact"`` uses the full ΔR and the
    reflectivity with atoms.
    """
    if not max_absorbed_photons > 0:
        raise ValueError("max_absorbed_photons must be > 0")
    if medium.density == 0:
        return 0.0
    theta = float(theta)
    if method == "linear":
        dr = delta_R_linear(stack, medium, z_b, theta)
        r = reflectivity(stack, theta)
    elif method == "exact":
        dr = delta_R_exact(stack, medium, z_b, theta)
        r = reflectivity(atom_stack(stack, refractive_index(medium), z_b), theta)
    else:
        raise ValueError(f"unknown method {method!r}")
    n_in = max_incident_photons(stack, medium, z_b, theta, max_absorbed_photons)
    probe = ProbeConfig(theta, efficiency, n_in, max_absorbed_photons)
    return signal_and_noise(float(dr), float(r), probe).snr


def chi_factor(stack, z_b, theta, efficiency=1.0):
    """Geometry factor χ of the closed-form photon-budget SNR."""
    pf = plasmon_factors(stack, theta)
    r = reflectivity(stack, theta)
    return (
        3.0 * efficiency / (2.0 * math.pi**2)
        * pf.theta_factor**2
        * (pf.kappa / pf.k0)
        / r
        * _gap_weight(pf) ** 2
        * pf.enhancement
        * np.exp(-2.0 * pf.kappa * z_b)
    )


def snr_closed_form(stack, medium, z_b, theta, efficiency=1.0, max_absorbed_photons=1.0):
    """``sqrt(χ λ³ ρ x²/(1+x²) N_abs)`` with x = 2δ/Γ; always >= 0."""
    x = medium.scaled_detuning
    chi = chi_factor(stack, z_b, theta, efficiency)
    lam = medium.transition.wavelength
    return np.sqrt(chi * lam**3 * medium.density * x * x / (1 + x * x) * max_absorbed_photons)


def qnd_max_atoms(stack, medium, z_b, theta, efficiency=1.0, thickness=math.inf):
    """Largest atom number countable with single-atom resolution while
    absorbing no more photons than there are atoms: ``(η / f_N) ΔR² / R``.

    Uses the exact ΔR, the reflectivity with atoms and the full f_N. Angles
    where the gap is not evanescent give NaN.
    """
    theta = np.asarray(theta, dtype=float)
    if medium.density == 0:
        return np.zeros_like(theta)[()]
    n4 = refractive_index(medium)
    gap = stack.layers[-1].n
    r_atoms = reflectivity(atom_stack(stack, n4, z_b, thickness), theta)
    r_bare = reflectivity(atom_stack(stack, gap, z_b, thickness), theta)
    kappa = _gap_kappa(stack, theta, strict=False)
    f_n, kr = _full_fraction(stack, medium, z_b, theta, field_enhancement(stack, theta, 0.0))
    valid = np.isfinite(kappa) & (kr > 0) & (f_n > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        n_max = efficiency * (r_atoms - r_bare) ** 2 / (r_atoms * f_n)
    return np.where(valid, n_max, np.nan)[()]


def optimize_qnd_angle(stack, medium, z_b, efficiency=1.0, lo=None, hi=None, n_grid=2000, tol=1e-9, strict=True):
    """Maximize ``qnd_max_atoms`` over the incidence angle.

    Returns ``(theta, n_max)``. The default window covers 10 degrees past the
    critical angle of the gap. With ``strict=False`` a maximum on the window
    edge is returned as is instead of raising ``NoBracketError``.
    """
    if lo is None:
        lo = stack.critical_angle() + 1e-6
    if hi is None:
        hi = min(lo + math.radians(10.0), math.pi / 2 - 1e-3)
    if medium.density == 0:
        return lo, 0.0

    def objective(th):
        return -qnd_max_atoms(stack, medium, z_b, th, efficiency)

    try:
        theta = minimize_bracketed(objective, lo, hi, n_grid=n_grid, tol=tol)
    except Exception:
        if strict:
            raise
        grid = np.linspace(lo, hi, n_grid)
        values = np.nan_to_num(qnd_max_atoms(stack, medium, z_b, grid, efficiency), nan=-np.inf)
        theta = float(grid[np.argmax(values)])
    return theta, float(qnd_max_atoms(stack, medium, z_b, theta, efficiency))


def atom_number_resolution(n_atoms, snr):
    """ΔN = N / |S_N|."""
    if n_atoms == 0:
        return 0.0
    if snr == 0:
        raise ValueError("resolution undefined for zero signal-to-noise ratio")
    return n_atoms / abs(snr)


def detection_report(stack, medium, z_b, probe, thickness=math.inf):
    """Collect every derived quantity for one parameter point."""
    theta = probe.angle
    n4 = refractive_index(medium)
    r = float(reflectivity(atom_stack(stack, n4, z_b, thickness), theta))
    dr = float(delta_R_exact(stack, medium, z_b, theta, thickness))
    sn = signal_and_noise(dr, r, probe)
    return DetectionReport(
        R=r,
        delta_R=dr,
        signal=sn.signal,
        snr=sn.snr,
        f_N=absorbed_fraction(stack, medium, z_b, theta).full,
        chi=float(chi_factor(stack, z_b, theta, probe.efficiency)),
        theta_factor=float(plasmon_factors(stack, theta).theta_factor),
        n_max=float(qnd_max_atoms(stack, medium, z_b, theta, probe.efficiency, thickness)),
    )


def uniform_profile(medium, z_b):
    """Semi-infinite slab at the medium's density starting at ``z_b``."""
    return UniformSlab(z_b, medium.density)

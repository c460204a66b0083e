"""Lorentz-model refractive index of a dilute Rb gas and density profiles along z.

The detuning is stored in units of the natural linewidth (δ/Γ) since every
expression depends on 2δ/Γ only. Its sign follows the dispersion factor
``(2δ/Γ) / (1 + (2δ/Γ)^2)``: negative detuning lowers Re(n) below one.
Local-field (Lorentz-Lorenz) corrections are not included.
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .units import cm3_to_m3, nm_to_m


@dataclass(frozen=True)
class AtomicTransition:
    """Rb D2 line by default: 780 nm, Γ = 2π·6 MHz."""

    wavelength: float = 780e-9
    linewidth: float = 2 * math.pi * 6e6

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.linewidth > 0:
            raise ValueError("linewidth must be positive")

    @property
    def strength(self):
        """Prefactor 3λ³/8π² (m³)."""
        return 3.0 * self.wavelength**3 / (8.0 * math.pi**2)


@dataclass(frozen=True)
class AtomicMedium:
    """Homogeneous gas at ``density`` (m^-3) probed at ``detuning`` (units of Γ).

    ``absorption=False`` drops the imaginary part of the index, leaving the
    purely dispersive medium used by the linearized expressions.
    """

    detuning: float
    density: float
    transition: AtomicTransition = field(default_factory=AtomicTransition)
    absorption: bool = True

    def __post_init__(self):
        if not self.density >= 0:
            raise ValueError(f"density must be >= 0, got {self.density}")

    @classmethod
    def from_angular_detuning(cls, delta, density, transition=None, **kwargs):
        transition = transition or AtomicTransition()
        return cls(delta / transition.linewidth, density, transition, **kwargs)

    @property
    def angular_detuning(self):
        return self.detuning * self.transition.linewidth

    @property
    def scaled_detuning(self):
        """2δ/Γ."""
        return 2.0 * self.detuning

    def with_detuning(self, detuning):
        return replace(self, detuning=detuning)

    def with_density(self, density):
        return replace(self, density=density)


def lorentzian(medium):
    """Absorptive line shape ``1 / (1 + (2δ/Γ)^2)``."""
    x = medium.scaled_detuning
    return 1.0 / (1.0 + x * x)


def dispersion_factor(medium):
    """Dispersive line shape ``(2δ/Γ) / (1 + (2δ/Γ)^2)``; odd in δ."""
    x = medium.scaled_detuning
    return x / (1.0 + x * x)


def polarizability_factor(medium):
    """β (m³) such that Re(n) = 1 + β ρ."""
    return medium.transition.strength * dispersion_factor(medium)


def absorption_factor(medium):
    """Im(n) per unit density (m³)."""
    return medium.transition.strength * lorentzian(medium)


def refractive_index(medium):
    """Complex index ``1 + β ρ + i (3λ³/8π²) ρ / (1 + (2δ/Γ)^2)``."""
    re = 1.0 + polarizability_factor(medium) * medium.density
    im = absorption_factor(medium) * medium.density if medium.absorption else 0.0
    return complex(re, im)


# --- density profiles along z (distance from the metal surface) -------------


@dataclass(frozen=True)
class UniformSlab:
    """Constant density on ``[z_b, z_b + thickness)``; semi-infinite by default."""

    z_b: float
    peak_density: float
    thickness: float = math.inf

    def __post_init__(self):
        if self.z_b < 0 or self.thickness < 0 or self.peak_density < 0:
            raise ValueError("z_b, thickness and density must be >= 0")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z >= self.z_b) & (z < self.z_b + self.thickness)
        return np.where(inside, self.peak_density, 0.0)

    def support(self):
        return self.z_b, self.z_b + self.thickness

    def breakpoints(self):
        return ()


@dataclass(frozen=True)
class ExponentialProfile:
    """``peak * exp(-(z - start) / decay_length)`` for z >= start, zero before."""

    peak_density: float
    decay_length: float
    start: float = 0.0

    def __post_init__(self):
        if self.peak_density < 0 or not self.decay_length > 0 or self.start < 0:
            raise ValueError("invalid exponential profile")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(over="ignore"):
            rho = self.peak_density * np.exp(-(z - self.start) / self.decay_length)
        return np.where(z >= self.start, rho, 0.0)

    def support(self):
        return self.start, math.inf

    def breakpoints(self):
        return ()


@dataclass(frozen=True)
class GaussianProfile:
    """``peak * exp(-(z - center)^2 / (2 sigma^2))``, truncated to z >= 0."""

    peak_density: float
    center: float
    sigma: float

    def __post_init__(self):
        if self.peak_density < 0 or not self.sigma > 0:
            raise ValueError("invalid gaussian profile")

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        rho = self.peak_density * np.exp(-0.5 * ((z - self.center) / self.sigma) ** 2)
        return np.where(z >= 0, rho, 0.0)

    def support(self):
        return max(0.0, self.center - 12 * self.sigma), self.center + 12 * self.sigma

    def breakpoints(self):
        lo, hi = self.support()
        return tuple(p for p in (self.center,) if lo < p < hi)


@dataclass(frozen=True)
class TabulatedProfile:
    """Piecewise-linear density through ``(z, rho)`` samples, zero outside."""

    z: tuple
    rho: tuple

    def __post_init__(self):
        z = tuple(float(v) for v in self.z)
        rho = tuple(float(v) for v in self.rho)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "rho", rho)
        if len(z) != len(rho) or len(z) < 2:
            raise ValueError("need at least two (z, rho) samples of equal length")
        if any(b <= a for a, b in zip(z, z[1:])):
            raise ValueError("tabulated z must be strictly increasing")
        if min(rho) < 0 or z[0] < 0:
            raise ValueError("tabulated z and rho must be >= 0")

    @property
    def peak_density(self):
        return max(self.rho)

    def __call__(self, z):
        return np.interp(z, self.z, self.rho, left=0.0, right=0.0)

    def support(self):
        return self.z[0], self.z[-1]

    def breakpoints(self):
        return self.z[1:-1]


def density_at(profile, z):
    """Density (m^-3) of ``profile`` at distance ``z`` (m) from the surface."""
    if np.any(np.asarray(z) < 0):
        raise ValueError("z must be >= 0")
    return profile(z)


def load_tabulated_profile(path):
    """Read a two-column text file: z in nm, density in cm^-3; '#' starts a comment."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns, got {data.shape[1]}")
    return TabulatedProfile(tuple(nm_to_m(data[:, 0])), tuple(cm3_to_m3(data[:, 1])))

"""Detuning spectra of ΔR and the width of their dispersive feature."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitError
from .metrics import delta_R_exact


@dataclass(frozen=True)
class ZbTable:
    """Turning-point distance z_B as a function of detuning (units of Γ), linearly interpolated."""

    detunings: tuple
    z_b: tuple

    def __post_init__(self):
        d = tuple(float(v) for v in self.detunings)
        z = tuple(float(v) for v in self.z_b)
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "z_b", z)
        if len(d) != len(z) or not d:
            raise ValueError("detunings and z_b must be non-empty and equally long")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("table detunings must be strictly increasing")
        if min(z) < 0:
            raise ValueError("z_b must be >= 0")

    def __call__(self, detuning):
        return float(np.interp(detuning, self.detunings, self.z_b))


@dataclass(frozen=True)
class SpectrumScenario:
    """Detuning grid (units of Γ), z_B policy and the Lorentzian plateau.

    ``z_b`` is either a fixed distance in meters or a ``ZbTable``. The
    plateau multiplies ΔR by ``1 - A_p / (1 + (2δ/Γ_p)^2)`` with
    ``plateau_width`` = Γ_p in units of Γ.
    """

    detunings: tuple
    z_b: object
    plateau_amplitude: float = 0.0
    plateau_width: float = 1.0

    def __post_init__(self):
        d = tuple(float(v) for v in self.detunings)
        object.__setattr__(self, "detunings", d)
        if not d:
            raise ValueError("empty detuning grid")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("detuning grid must be strictly increasing")
        if not 0.0 <= self.plateau_amplitude <= 1.0:
            raise ValueError("plateau amplitude must lie in [0, 1]")
        if not self.plateau_width > 0:
            raise ValueError("plateau width must be positive")

    def z_b_at(self, detuning):
        return self.z_b(detuning) if callable(self.z_b) else float(self.z_b)

    def plateau_factor(self, detuning):
        u = 2.0 * np.asarray(detuning, dtype=float) / self.plateau_width
        return 1.0 - self.plateau_amplitude / (1.0 + u * u)


class Spectrum(NamedTuple):
    detunings: np.ndarray  # units of Γ
    z_b: np.ndarray
    delta_r: np.ndarray


def spectrum(scenario, stack, medium, theta, cloud=None):
    """ΔR at every detuning of ``scenario`` (exact ΔR times the plateau factor).

    When ``cloud`` is given its peak density replaces the medium's.
    """
    if cloud is not None:
        medium = medium.with_density(cloud.peak_density)
    detunings = np.array(scenario.detunings)
    z_b = np.array([scenario.z_b_at(d) for d in detunings])
    dr = np.array(
        [float(delta_R_exact(stack, medium.with_detuning(d), z, theta)) for d, z in zip(detunings, z_b)]
    )
    return Spectrum(detunings, z_b, dr * scenario.plateau_factor(detunings))


class DispersiveFit(NamedTuple):
    dispersive: float
    absorptive: float
    offset: float
    width: float  # same unit as the detuning axis


def _fano_model(d, dispersive, absorptive, offset, width):
    u = 2.0 * d / width
    return (dispersive * u + absorptive) / (1.0 + u * u) + offset


def fit_dispersive_width(detunings, delta_r, width_guess=1.0):
    """Fit ``(a u + b) / (1 + u^2) + c`` with ``u = 2δ/w`` and return the parameters.

    The dispersive and absorptive Lorentzians share one width ``w``, which is
    the linewidth of the feature in the units of ``detunings``.
    """
    d = np.asarray(detunings, dtype=float)
    y = np.asarray(delta_r, dtype=float)
    scale = np.max(np.abs(y))
    if scale == 0:
        raise FitError("spectrum is identically zero", 0.0)
    yn = y / scale
    p0 = [yn[np.argmax(d)] - yn[np.argmin(d)] or 1.0, 0.0, 0.0, width_guess]
    try:
        p, _ = curve_fit(_fano_model, d, yn, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"dispersive fit failed: {exc}", float(np.linalg.norm(yn))) from exc
    return DispersiveFit(float(p[0] * scale), float(p[1] * scale), float(p[2] * scale), float(abs(p[3])))

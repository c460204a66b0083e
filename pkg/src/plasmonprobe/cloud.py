"""Gaussian atom cloud and probe beam, plus the transverse-overlap quantities."""
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NotEvanescentError
from .optics import vertical_wavenumber

_GAUSS_VOLUME = (math.pi / 2) ** 1.5  # ∫ exp(-2x²/r²) over 3-D, per unit r_x r_y r_z


@dataclass(frozen=True)
class CloudModel:
    """Ellipsoidal cloud with ``1/e^2`` radii ``(r_x, r_y, r_z)`` in meters.

    ``atom_number`` is optional; when given it is checked (warn only) against
    the number implied by ``peak_density`` and the radii.
    """

    radii: tuple
    peak_density: float
    atom_number: float = None
    velocity_z: float = 0.0

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        object.__setattr__(self, "radii", radii)
        if len(radii) != 3 or min(radii) <= 0:
            raise ValueError("cloud needs three positive radii")
        if self.peak_density < 0:
            raise ValueError("peak density must be >= 0")
        if self.atom_number is not None and self.implied_atom_number > 0:
            mismatch = abs(self.atom_number / self.implied_atom_number - 1)
            if mismatch > 0.2:
                warnings.warn(
                    f"atom number {self.atom_number:g} differs from density-implied "
                    f"{self.implied_atom_number:g} by {mismatch:.0%}",
                    stacklevel=3,
                )

    @classmethod
    def from_atom_number(cls, radii, atom_number, velocity_z=0.0):
        rx, ry, rz = radii
        peak = atom_number / (_GAUSS_VOLUME * rx * ry * rz)
        return cls(radii, peak, atom_number, velocity_z)

    @property
    def implied_atom_number(self):
        rx, ry, rz = self.radii
        return self.peak_density * _GAUSS_VOLUME * rx * ry * rz

    @property
    def crossing_time(self):
        """Temporal ``1/e^2`` half-width ``r_z / v_z`` of the surface passage."""
        if self.velocity_z == 0:
            return math.inf
        return self.radii[2] / abs(self.velocity_z)

    def density(self, x, y, z=0.0):
        rx, ry, rz = self.radii
        return self.peak_density * np.exp(-2 * (np.square(x) / rx**2 + np.square(y) / ry**2 + np.square(z) / rz**2))


@dataclass(frozen=True)
class BeamModel:
    """Gaussian probe spot with ``1/e^2`` intensity waists on the surface."""

    waists: tuple
    intensity_ratio: float = 0.0  # I_in / I_sat

    def __post_init__(self):
        waists = tuple(float(w) for w in self.waists)
        object.__setattr__(self, "waists", waists)
        if len(waists) != 2 or min(waists) <= 0:
            raise ValueError("beam needs two positive waists")
        if self.intensity_ratio < 0:
            raise ValueError("intensity ratio must be >= 0")

    def intensity(self, x, y):
        wx, wy = self.waists
        return np.exp(-2 * (np.square(x) / wx**2 + np.square(y) / wy**2))


def overlap_average_factor(cloud, beam):
    """Center-of-cloud ΔR over the beam-averaged ΔR.

    The reflected power change is the beam intensity weighted by the local
    density; normalizing by the total reflected power gives the average. Both
    transverse integrals are done by quadrature, one axis at a time since
    the Gaussians factorize.
    """
    factor = 1.0
    for r, w in zip(cloud.radii[:2], beam.waists):
        scale = max(r, w)

        def beam_only(u, w=w, scale=scale):
            return math.exp(-2 * (u * scale) ** 2 / w**2)

        def weighted(u, w=w, r=r, scale=scale):
            return math.exp(-2 * (u * scale) ** 2 * (1 / w**2 + 1 / r**2))

        total = integrate.quad(beam_only, -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
        overlap = integrate.quad(weighted, -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]
        factor *= total / overlap
    return factor


def slice_thickness(stack, theta):
    """Effective probed thickness ``l = 1/kappa`` of the evanescent field."""
    kz = vertical_wavenumber(stack, -1, theta)
    if not (kz.imag > 0 and abs(kz.real) <= 1e-9 * abs(kz)):
        raise NotEvanescentError("no evanescent wave in the last layer at this angle")
    return 1.0 / float(kz.imag)


def detected_atoms_in_slice(cloud, stack, theta, z_slice=0.0):
    """Atoms inside the probed slice: ``∫∫ rho(x, y, z_slice) l dx dy``.

    Returns ``(n_det, l)``.
    """
    length = slice_thickness(stack, theta)
    rx, ry, _ = cloud.radii
    column = float(cloud.density(0.0, 0.0, z_slice)) * (math.pi / 2) * rx * ry
    return column * length, length


def slice_atoms_from_map(density_map, pixel_pitch, length):
    """Same count for a sampled transverse density map (pixel area ``pitch^2``)."""
    return float(np.sum(density_map)) * pixel_pitch**2 * length

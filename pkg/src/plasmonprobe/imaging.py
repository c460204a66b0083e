"""Per-pixel ΔR images of a transverse density map.

Each pixel is treated as its own stratified medium: there is no lateral
coupling between pixels before the optional blur.
"""
import math

import numpy as np
from scipy.ndimage import gaussian_filter

from .atoms import UniformSlab
from .metrics import delta_R_exact, delta_R_profile

_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def gaussian_density_map(cloud, shape, pitch):
    """Density ``rho(x, y, 0)`` sampled on a centered ``shape = (ny, nx)`` grid."""
    ny, nx = shape
    x = (np.arange(nx) - (nx - 1) / 2) * pitch
    y = (np.arange(ny) - (ny - 1) / 2) * pitch
    return cloud.density(x[None, :], y[:, None])


def blur(image, pixel_pitch, resolution):
    """Gaussian blur whose point-spread function has FWHM ``resolution``."""
    sigma = resolution / _FWHM_PER_SIGMA / pixel_pitch
    return gaussian_filter(np.asarray(image, dtype=float), sigma, mode="nearest")


def dispersive_image(density_map, stack, medium, z_b, theta, pixel_pitch=None, resolution=None, method="linear"):
    """ΔR for every pixel of ``density_map`` (m^-3).

    ``method="linear"`` scales the unit-density slab response, which is exact
    to first order in the density; ``"exact"`` runs the full transfer matrix
    once per distinct density value. A ``resolution`` (FWHM, meters) applies
    a Gaussian blur and needs ``pixel_pitch``.
    """
    rho = np.asarray(density_map, dtype=float)
    if np.any(rho < 0):
        raise ValueError("densities must be >= 0")
    if method == "linear":
        unit = delta_R_profile(stack, medium, UniformSlab(z_b, 1.0), theta)
        image = unit * rho
    elif method == "exact":
        values, inverse = np.unique(rho, return_inverse=True)
        per_value = np.array(
            [float(delta_R_exact(stack, medium.with_density(v), z_b, theta)) if v else 0.0 for v in values]
        )
        image = per_value[inverse].reshape(rho.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    if resolution is not None:
        if pixel_pitch is None:
            raise ValueError("blurring needs the pixel pitch")
        image = blur(image, pixel_pitch, resolution)
    return image

"""Transfer-matrix optics for p-polarized light in a stratified medium.

Layers are numbered from the incidence half-space (index 0). Every function
taking ``theta`` (incidence angle in the first layer, radians) accepts a
float or an array and broadcasts over it; 2x2 matrices come back with shape
``theta.shape + (2, 2)``.

Matrix convention: the field vector is (backward, forward) amplitude, the
interface matrix is ``(1/t) [[1, r], [r, 1]]`` and propagation through a
layer is ``diag(exp(i kz d), exp(-i kz d))``, so that
``r = M[0, 1] / M[1, 1]`` and ``t = 1 / M[1, 1]``.
"""
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateStackError
from .minimize import minimize_bracketed


@dataclass(frozen=True)
class Layer:
    """Homogeneous layer; ``thickness`` in meters, ``math.inf`` for a half-space."""

    n: complex
    thickness: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "n", complex(self.n))
        if self.n.imag < 0:
            raise ValueError(f"gain medium rejected: Im(n) = {self.n.imag} < 0")
        if not self.thickness >= 0:
            raise ValueError(f"thickness must be >= 0, got {self.thickness}")

    @property
    def semi_infinite(self):
        return math.isinf(self.thickness)


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers, first = incidence half-space, plus the vacuum wavelength."""

    layers: tuple
    wavelength: float

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if len(layers) < 2:
            raise ValueError("a stack needs at least two layers")
        if not all(isinstance(layer, Layer) for layer in layers):
            raise TypeError("layers must be Layer instances")
        if layers[0].n.imag != 0:
            raise ValueError("incidence medium must be lossless")
        for j, layer in enumerate(layers[1:-1], start=1):
            if layer.semi_infinite:
                raise ValueError(f"inner layer {j} cannot be semi-infinite")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")

    @property
    def k0(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def indices(self):
        return tuple(layer.n for layer in self.layers)

    def __len__(self):
        return len(self.layers)

    def replace_layer(self, j, layer):
        layers = list(self.layers)
        layers[j] = layer
        return replace(self, layers=tuple(layers))

    def insert(self, j, layer):
        layers = list(self.layers)
        layers.insert(j, layer)
        return replace(self, layers=tuple(layers))

    def critical_angle(self, j=-1):
        """Angle beyond which a lossless layer ``j`` carries an evanescent wave."""
        ratio = self.layers[j].n.real / self.layers[0].n.real
        return math.asin(ratio) if ratio < 1 else math.pi / 2


def _check_angle(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta >= math.pi / 2):
        raise ValueError("incidence angle must lie in [0, pi/2)")
    return theta


def _kz(n, n_inc, theta, k0):
    q = np.sqrt(complex(n) ** 2 - (n_inc * np.sin(theta)) ** 2 + 0j)
    # principal root already has Re >= 0; fix the signed-zero corner case
    q = np.where(q.imag < 0, -q, q)
    return k0 * q


def vertical_wavenumber(stack, j, theta):
    """z-component of the wave vector in layer ``j`` (1/m).

    ``k0 * sqrt(n_j^2 - n_1^2 sin^2 theta)`` on the branch with Re >= 0 and
    Im >= 0; beyond the critical angle of a lossless layer it is ``i*kappa``
    with ``kappa`` the inverse decay length.
    """
    theta = _check_angle(theta)
    return _kz(stack.layers[j].n, stack.layers[0].n.real, theta, stack.k0)


def fresnel_interface(stack, i, j, theta):
    """p-polarized amplitude coefficients ``(r_ij, t_ij)`` for going from layer i to j."""
    ni, nj = stack.layers[i].n, stack.layers[j].n
    ki = vertical_wavenumber(stack, i, theta)
    kj = vertical_wavenumber(stack, j, theta)
    den = ki * nj**2 + kj * ni**2
    r = (ki * nj**2 - kj * ni**2) / den
    t = 2.0 * ki * ni * nj / den
    return r, t


def _matrix(m00, m01, m10, m11):
    m00 = np.asarray(m00, dtype=complex)
    out = np.empty(np.broadcast(m00, m01, m10, m11).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = m00
    out[..., 0, 1] = m01
    out[..., 1, 0] = m10
    out[..., 1, 1] = m11
    return out


def matmul2(a, b):
    """Broadcasting product of stacks of 2x2 matrices, written out elementwise."""
    return _matrix(
        a[..., 0, 0] * b[..., 0, 0] + a[..., 0, 1] * b[..., 1, 0],
        a[..., 0, 0] * b[..., 0, 1] + a[..., 0, 1] * b[..., 1, 1],
        a[..., 1, 0] * b[..., 0, 0] + a[..., 1, 1] * b[..., 1, 0],
        a[..., 1, 0] * b[..., 0, 1] + a[..., 1, 1] * b[..., 1, 1],
    )


def interface_matrix(stack, i, j, theta):
    r, t = fresnel_interface(stack, i, j, theta)
    return _matrix(1.0 / t, r / t, r / t, 1.0 / t)


def propagation_matrix(stack, j, theta, distance=None):
    """Free propagation through layer ``j`` (or over ``distance`` meters inside it)."""
    d = stack.layers[j].thickness if distance is None else distance
    if math.isinf(d):
        raise ValueError(f"cannot propagate through semi-infinite layer {j}")
    kz = vertical_wavenumber(stack, j, theta)
    zero = np.zeros_like(kz)
    return _matrix(np.exp(1j * kz * d), zero, zero, np.exp(-1j * kz * d))


def partial_matrix(stack, theta, upto):
    """Product ``M_12 M_2 ... M_(upto-1),upto M_upto``.

    ``upto`` is the index of the last layer whose free propagation is
    included; ``upto=0`` gives the identity. For the four-layer
    glass/gold/gap/atoms system ``partial_matrix(stack, theta, 2)`` is the
    matrix A that separates the solid layers from the atoms.
    """
    theta = _check_angle(theta)
    m = _matrix(np.ones_like(theta), 0, 0, 1)
    for i in range(upto):
        m = matmul2(m, interface_matrix(stack, i, i + 1, theta))
        m = matmul2(m, propagation_matrix(stack, i + 1, theta))
    return m


def a_matrix(stack, theta):
    """Everything except the final interface (A of the four-layer split)."""
    return partial_matrix(stack, theta, len(stack) - 2)


def total_matrix(stack, theta):
    n = len(stack)
    return matmul2(a_matrix(stack, theta), interface_matrix(stack, n - 2, n - 1, theta))


def _checked_m22(m):
    m22 = m[..., 1, 1]
    if np.any(np.abs(m22) < 1e-30):
        raise DegenerateStackError("|M_tot[2,2]| < 1e-30")
    return m22


def reflection_coefficient(stack, theta):
    m = total_matrix(stack, theta)
    return m[..., 0, 1] / _checked_m22(m)


def transmission_coefficient(stack, theta):
    return 1.0 / _checked_m22(total_matrix(stack, theta))


def reflectivity(stack, theta):
    """Intensity reflectivity ``|M[0,1] / M[1,1]|^2``."""
    return np.abs(reflection_coefficient(stack, theta)) ** 2


def transmissivity(stack, theta):
    """Transmitted z-directed Poynting flux over the incident one."""
    t = transmission_coefficient(stack, theta)
    n1, nn = stack.layers[0].n, stack.layers[-1].n
    k1 = vertical_wavenumber(stack, 0, theta)
    kn = vertical_wavenumber(stack, -1, theta)
    num = np.real(kn / nn**2) * abs(nn) ** 2
    den = np.real(k1 / n1**2) * abs(n1) ** 2
    return num / den * np.abs(t) ** 2


def field_enhancement(stack, theta, z=0.0):
    """Intensity enhancement ``1/|A22|^2`` a distance ``z`` into the last layer.

    At ``z = 0`` this is the plasmonic enhancement ``|t|^2`` at the metal
    surface; for an evanescent last layer it decays as ``exp(-2 kappa z)``.
    """
    if z < 0:
        raise ValueError("z must be >= 0")
    m = total_matrix(stack, theta)
    if z:
        m = matmul2(m, propagation_matrix(stack, len(stack) - 1, theta, distance=z))
    return 1.0 / np.abs(m[..., 1, 1]) ** 2


def find_resonance_angle(stack, lo=None, hi=None, n_grid=400, tol=1e-6):
    """Angle of minimum reflectivity (the plasmon dip).

    The default window starts just past the critical angle of the last layer
    and spans 20 degrees.
    """
    if lo is None:
        lo = stack.critical_angle() + 1e-6
    if hi is None:
        hi = min(lo + math.radians(20.0), math.pi / 2 - 1e-3)
    return minimize_bracketed(lambda th: reflectivity(stack, th), lo, hi, n_grid=n_grid, tol=tol)

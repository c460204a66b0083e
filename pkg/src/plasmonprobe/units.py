"""Conversions between the user-facing units and SI.

Detunings are kept as multiples of the natural linewidth Γ; ``mhz`` values
are ordinary frequencies (Γ = 2π·6 MHz corresponds to 6 MHz).
"""
import math

NM = 1e-9
UM = 1e-6
PER_CM3 = 1e6  # 1 cm^-3 in m^-3


def nm_to_m(x):
    return x * NM


def m_to_nm(x):
    return x / NM


def um_to_m(x):
    return x * UM


def m_to_um(x):
    return x / UM


def deg_to_rad(x):
    return x * (math.pi / 180.0)


def rad_to_deg(x):
    return x * (180.0 / math.pi)


def cm3_to_m3(x):
    """Number density in cm^-3 -> m^-3."""
    return x * PER_CM3


def m3_to_cm3(x):
    return x / PER_CM3


def mhz_to_angular(x):
    """Frequency in MHz -> angular frequency in rad/s."""
    return x * (2e6 * math.pi)


def angular_to_mhz(x):
    return x / (2e6 * math.pi)


def mhz_to_gamma(x, linewidth_mhz):
    """Detuning in MHz -> multiples of the linewidth (both plain frequencies)."""
    return x / linewidth_mhz


def gamma_to_mhz(x, linewidth_mhz):
    return x * linewidth_mhz

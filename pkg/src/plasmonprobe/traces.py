"""Synthetic reflection time traces of a cloud passing the surface, and their peak fit."""
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import curve_fit
from scipy.signal import lfilter

from .atoms import refractive_index
from .cloud import overlap_average_factor
from .errors import FitError
from .metrics import atom_stack, delta_R_exact
from .optics import reflectivity


@dataclass(frozen=True)
class Trace:
    """Samples ``signal(t)``; everything from ``tail_start`` on is noise only."""

    t: np.ndarray
    signal: np.ndarray
    tail_start: float

    @property
    def tail(self):
        return self.signal[self.t >= self.tail_start]


def _gaussian(t, height, center, width, offset):
    return offset + height * np.exp(-2.0 * ((t - center) / width) ** 2)


def lowpass(signal, sample_rate, cutoff_hz):
    """Single-pole IIR low-pass with -3 dB point ``cutoff_hz``."""
    alpha = 1.0 - math.exp(-2.0 * math.pi * cutoff_hz / sample_rate)
    return lfilter([alpha], [1.0, alpha - 1.0], signal)


def gaussian_trace(
    height,
    width,
    sample_rate,
    noise_rms=0.0,
    rng=None,
    center=None,
    offset=0.0,
    tail=4e-3,
    lowpass_hz=None,
):
    """Gaussian pulse ``height * exp(-2 (t - center)^2 / width^2)`` plus white noise.

    ``width`` is the temporal ``1/e^2`` half-width. The pulse window spans
    ``[0, 2 center]`` (``center`` defaults to four widths) and is followed by
    a noise-only tail of ``tail`` seconds. ``rng`` is a seed or a
    ``numpy.random.Generator``.
    """
    if not sample_rate > 0:
        raise ValueError("sample_rate must be positive")
    if not width > 0:
        raise ValueError("width must be positive")
    if noise_rms < 0 or tail < 0:
        raise ValueError("noise_rms and tail must be >= 0")
    if center is None:
        center = 4.0 * width
    tail_start = 2.0 * center
    n = int(math.ceil((tail_start + tail) * sample_rate)) + 1
    t = np.arange(n) / sample_rate
    y = _gaussian(t, height, center, width, offset)
    if noise_rms > 0:
        y = y + np.random.default_rng(rng).normal(0.0, noise_rms, n)
    if lowpass_hz is not None:
        y = lowpass(y, sample_rate, lowpass_hz)
    return Trace(t, y, tail_start)


def shot_noise_rms(r, photons_per_sample, efficiency=1.0):
    """Shot-noise floor in units of R: ``sqrt(R / (η N_in))`` per sample."""
    if not photons_per_sample > 0:
        raise ValueError("photons_per_sample must be positive")
    return math.sqrt(r / (efficiency * photons_per_sample))


def synthesize_time_trace(
    cloud,
    beam,
    stack,
    medium,
    z_b,
    theta,
    sample_rate,
    noise_rms=0.0,
    seed=None,
    noise="white",
    photons_per_sample=None,
    efficiency=1.0,
    tail=4e-3,
    lowpass_hz=None,
):
    """ΔR trace of the cloud crossing the evanescent field.

    The peak is the exact ΔR at the cloud's peak density divided by the
    transverse overlap factor, the temporal half-width is ``r_z / v_z``.
    ``noise="shot"`` replaces ``noise_rms`` by the shot-noise floor for
    ``photons_per_sample`` incident photons.
    """
    if cloud.velocity_z == 0:
        raise ValueError("cloud needs a nonzero velocity_z to cross the surface")
    medium = medium.with_density(cloud.peak_density)
    height = float(delta_R_exact(stack, medium, z_b, theta)) / overlap_average_factor(cloud, beam)
    if noise == "shot":
        r = float(reflectivity(atom_stack(stack, refractive_index(medium), z_b), theta))
        noise_rms = shot_noise_rms(r, photons_per_sample, efficiency)
    elif noise != "white":
        raise ValueError(f"unknown noise model {noise!r}")
    return gaussian_trace(
        height, cloud.crossing_time, sample_rate, noise_rms, seed, tail=tail, lowpass_hz=lowpass_hz
    )


class PeakFit(NamedTuple):
    height: float
    center: float
    width: float
    offset: float
    noise_std: float
    snr: float
    residual_norm: float


def fit_gaussian_peak(trace):
    """Least-squares fit of offset plus Gaussian; S_N = height / std(tail).

    A trace without any variation returns all zeros.
    """
    t = np.asarray(trace.t, dtype=float)
    y = np.asarray(trace.signal, dtype=float)
    tail = y[t >= trace.tail_start]
    if tail.size < 2:
        raise ValueError("trace needs at least two samples in its noise tail")
    noise_std = float(np.std(tail, ddof=1))
    if np.ptp(y) == 0:
        return PeakFit(0.0, 0.0, 0.0, float(y[0]), noise_std, 0.0, 0.0)

    base = float(np.median(tail))
    dev = y - base
    i_peak = int(np.argmax(np.abs(dev)))
    h0 = float(dev[i_peak])
    above = t[(t < trace.tail_start) & (dev / h0 > math.exp(-2.0))]
    w0 = max(0.5 * (above.max() - above.min()), t[1] - t[0]) if above.size else t[-1] / 8

    # fit in scaled units so the tolerances are meaningful
    ts, ys = w0, abs(h0)
    try:
        p, _ = curve_fit(
            _gaussian,
            t / ts,
            y / ys,
            p0=[h0 / ys, t[i_peak] / ts, 1.0, base / ys],
            xtol=1e-14,
            ftol=1e-14,
            gtol=1e-14,
            maxfev=20000,
        )
    except RuntimeError as exc:
        residual = float(np.linalg.norm(dev))
        raise FitError(f"gaussian fit did not converge: {exc}", residual) from exc
    height, center, width, offset = p[0] * ys, p[1] * ts, abs(p[2]) * ts, p[3] * ys
    residual = float(np.linalg.norm(y - _gaussian(t, height, center, width, offset)))
    if noise_std > 0:
        snr = height / noise_std
    else:
        snr = math.copysign(math.inf, height) if height else 0.0
    return PeakFit(float(height), float(center), float(width), float(offset), noise_std, float(snr), residual)

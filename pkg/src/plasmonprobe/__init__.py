"""Plasmon-enhanced dispersive detection of cold atoms near a gold film."""
from .atoms import (
    AtomicMedium,
    AtomicTransition,
    ExponentialProfile,
    GaussianProfile,
    TabulatedProfile,
    UniformSlab,
    refractive_index,
)
from .cloud import BeamModel, CloudModel, detected_atoms_in_slice, overlap_average_factor
from .errors import (
    ConfigError,
    DegenerateStackError,
    FitError,
    NoBracketError,
    NotEvanescentError,
    NumericalError,
    PlasmonProbeError,
    QuadratureError,
)
from .imaging import dispersive_image, gaussian_density_map
from .metrics import (
    ProbeConfig,
    absorbed_fraction,
    chi_factor,
    delta_R_exact,
    delta_R_linear,
    delta_R_profile,
    detection_report,
    optimize_qnd_angle,
    qnd_max_atoms,
    reflectivity_density_derivative,
    signal_and_noise,
    snr_closed_form,
    snr_photon_budget,
)
from .optics import (
    Layer,
    LayerStack,
    field_enhancement,
    find_resonance_angle,
    reflection_coefficient,
    reflectivity,
    transmission_coefficient,
    transmissivity,
)
from .spectra import SpectrumScenario, ZbTable, fit_dispersive_width, spectrum
from .traces import fit_gaussian_peak, gaussian_trace, synthesize_time_trace

__version__ = "0.1.0"

__all__ = [
    "AtomicMedium",
    "AtomicTransition",
    "BeamModel",
    "CloudModel",
    "ConfigError",
    "DegenerateStackError",
    "ExponentialProfile",
    "FitError",
    "GaussianProfile",
    "Layer",
    "LayerStack",
    "NoBracketError",
    "NotEvanescentError",
    "NumericalError",
    "PlasmonProbeError",
    "ProbeConfig",
    "QuadratureError",
    "SpectrumScenario",
    "TabulatedProfile",
    "UniformSlab",
    "ZbTable",
    "absorbed_fraction",
    "chi_factor",
    "delta_R_exact",
    "delta_R_linear",
    "delta_R_profile",
    "detected_atoms_in_slice",
    "detection_report",
    "dispersive_image",
    "field_enhancement",
    "find_resonance_angle",
    "fit_dispersive_width",
    "fit_gaussian_peak",
    "gaussian_density_map",
    "gaussian_trace",
    "optimize_qnd_angle",
    "overlap_average_factor",
    "qnd_max_atoms",
    "reflection_coefficient",
    "reflectivity",
    "reflectivity_density_derivative",
    "refractive_index",
    "signal_and_noise",
    "snr_closed_form",
    "snr_photon_budget",
    "spectrum",
    "synthesize_time_trace",
    "transmission_coefficient",
    "transmissivity",
]

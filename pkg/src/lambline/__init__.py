"""A1 Lamb-wave acoustic delay line modeling, synthesis, and extraction."""

from .dispersion import (
    DispersionCurve,
    DispersionPoint,
    PlateSpec,
    a1_beta,
    a1_cutoff,
    a1_freq,
    a1_vg,
    a1_vp,
    evanescent_decay,
    k2_from_velocities,
    rayleigh_lamb_residual,
    solve_branches,
)
from .extraction import (
    BandMetrics,
    PropagationFit,
    band_metrics,
    fit_propagation,
    group_delay,
    savgol,
    wideband_fit,
)
from .loading import (
    LayerStack,
    TransducerGeometry,
    bilayer_cutoff_short,
    center_frequency,
    composite_vl_short,
    electrode_resistance,
    stress_profile,
)
from .materials import (
    ElectrodeMaterial,
    MaterialSet,
    builtin_electrode,
    builtin_linbo3,
    effective_longitudinal_velocity,
    longitudinal_velocity,
    shear_velocity,
    stiffen,
)
from .network import (
    AdlDesign,
    DelaySpec,
    MatchResult,
    TwoPortNetwork,
    conjugate_match,
    renormalize,
    synthesize,
    touchstone_read,
    touchstone_write,
)
from .transducer import TransducerResponse, admittance, array_response, electrode_positions

__version__ = "0.1.0"

__all__ = [
    "AdlDesign",
    "BandMetrics",
    "DelaySpec",
    "DispersionCurve",
    "DispersionPoint",
    "ElectrodeMaterial",
    "LayerStack",
    "MatchResult",
    "MaterialSet",
    "PlateSpec",
    "PropagationFit",
    "TransducerGeometry",
    "TransducerResponse",
    "TwoPortNetwork",
    "a1_beta",
    "a1_cutoff",
    "a1_freq",
    "a1_vg",
    "a1_vp",
    "admittance",
    "array_response",
    "band_metrics",
    "bilayer_cutoff_short",
    "builtin_electrode",
    "builtin_linbo3",
    "center_frequency",
    "composite_vl_short",
    "conjugate_match",
    "effective_longitudinal_velocity",
    "electrode_positions",
    "electrode_resistance",
    "evanescent_decay",
    "fit_propagation",
    "group_delay",
    "k2_from_velocities",
    "longitudinal_velocity",
    "rayleigh_lamb_residual",
    "renormalize",
    "savgol",
    "shear_velocity",
    "solve_branches",
    "stiffen",
    "stress_profile",
    "synthesize",
    "touchstone_read",
    "touchstone_write",
    "wideband_fit",
]

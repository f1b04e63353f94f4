"""Non-Gaussianity monotones for bosonic states and operations."""

__version__ = "0.1.0"

from .errors import (
    InvalidStateError,
    TruncationError,
    UnsupportedMapError,
    ZeroProbabilityError,
)
from .fock import (
    DEFAULT_CUTOFF,
    ConditionalMap,
    FockArray,
    apply_map,
    apply_unitary,
    build_state,
    build_unitary,
    delta_g,
    delta_g_relent,
    gaussian_to_fock,
    gaussify,
    moments,
    number_distribution,
    partial_trace,
    relative_entropy,
    von_neumann_entropy,
)
from .gaussian import (
    GaussianState,
    SymplecticOp,
    WilliamsonSpectrum,
    apply_symplectic,
    gaussian_entropy,
    gaussian_unitary,
    partial_trace_gaussian,
    purify,
    schmidt_decompose,
    symplectic_eigenvalues,
    symplectic_form,
    thermal_entropy,
    thermal_state,
    tmsv_state,
    vacuum_state,
    williamson,
)
from .maps import (
    MapDescriptor,
    bps,
    coherent_projector,
    compose,
    gaussian_dilatable,
    identity_map,
    kerr,
    loss,
    parse_map_spec,
    parse_state_spec,
    pna,
    pns,
)
from .monotone import (
    DivergenceProfile,
    InputParams,
    MonotoneResult,
    alpha_zero_spread,
    analytic_output_covariance,
    d_g_bound,
    delta_tilde,
    divergence_profile,
    energy_ceiling,
    gaussian_mean_photons,
    gd_upper_bound,
    input_family,
    mixed_unitary_bounds,
    tmsv_wick_expectation,
)

__all__ = [
    "DEFAULT_CUTOFF",
    "ConditionalMap",
    "DivergenceProfile",
    "FockArray",
    "GaussianState",
    "InputParams",
    "InvalidStateError",
    "MapDescriptor",
    "MonotoneResult",
    "SymplecticOp",
    "TruncationError",
    "UnsupportedMapError",
    "WilliamsonSpectrum",
    "ZeroProbabilityError",
    "alpha_zero_spread",
    "analytic_output_covariance",
    "apply_map",
    "apply_symplectic",
    "apply_unitary",
    "bps",
    "build_state",
    "build_unitary",
    "coherent_projector",
    "compose",
    "d_g_bound",
    "delta_g",
    "delta_g_relent",
    "delta_tilde",
    "divergence_profile",
    "energy_ceiling",
    "gaussian_dilatable",
    "gaussian_entropy",
    "gaussian_mean_photons",
    "gaussian_to_fock",
    "gaussian_unitary",
    "gaussify",
    "gd_upper_bound",
    "identity_map",
    "input_family",
    "kerr",
    "loss",
    "mixed_unitary_bounds",
    "moments",
    "number_distribution",
    "parse_map_spec",
    "parse_state_spec",
    "partial_trace",
    "partial_trace_gaussian",
    "pna",
    "pns",
    "purify",
    "relative_entropy",
    "schmidt_decompose",
    "symplectic_eigenvalues",
    "symplectic_form",
    "thermal_entropy",
    "thermal_state",
    "tmsv_state",
    "vacuum_state",
    "von_neumann_entropy",
    "williamson",
]

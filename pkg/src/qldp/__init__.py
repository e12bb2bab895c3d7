"""Divergences, sample-complexity bounds and exact oracles for binary quantum
hypothesis testing under local differential privacy."""

from .bounds import (
    BoundEntry,
    BoundsCertificate,
    asymmetric_ldp_bounds,
    bayes_error,
    bayes_to_prior_free,
    fidelity_sc_bounds,
    js_hellinger_corollary_constant,
    ldp_sc_bounds,
    majority_boost,
    prior_sc_bounds,
    symmetric_asymmetric_conversions,
    unconstrained_certificate,
)
from .divergences import (
    DivergenceValue,
    bures_distance,
    chi_squared,
    f_divergence_integral,
    fidelity,
    hockey_stick,
    integral_hellinger,
    jensen_shannon,
    max_relative_entropy,
    petz_quantities,
    relative_entropy,
    sandwiched_renyi,
    trace_distance,
)
from .errors import (
    DimCapExceeded,
    NonHermitian,
    ParseError,
    QldpError,
    RangeViolation,
    ValidationError,
)
from .io import load_channel, load_state, save_channel, save_state
from .ldp import (
    Channel,
    apply_channel,
    binary_mechanism,
    ldp_extremes,
    trace_contraction_estimate,
    verify_ldp,
)
from .linalg import DensityMatrix, eigh, positive_part_trace, random_density, tensor_power
from .oracle import (
    CapExceeded,
    OracleResult,
    binary_sample_complexity,
    exact_bayes_error_n,
    ldp_witness,
    neyman_pearson_scan,
    quantum_sample_complexity,
)

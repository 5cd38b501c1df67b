"""Classification capacity of remote subspace classifiers over wireless channels."""

from .capacity import (
    CapacityQuery,
    CapacityResult,
    capacity_random_lb,
    capacity_selection_asymptotic,
    capacity_selection_lb,
    capacity_selection_ub,
    empirical_capacity,
    ergodic_capacity,
    fastfading_capacity,
    outage_capacity,
    selection_exponents,
)
from .channel import (
    ChannelParams,
    FastFading,
    ergodic_rate,
    ergodic_rate_mc,
    feature_budget,
    make_erasure_mask,
    outage_prob,
    outage_rate,
    pmf_received_binomial,
    pmf_received_poisson,
    poisson_approx_tv,
    rate_siso,
    sample_rayleigh_gain,
)
from .datamodel import (
    ErrorEstimate,
    apply_erasure,
    classify_ml,
    estimate_error_mc,
    generate_sample,
    loglik_scores,
    pairwise_error_mc,
    restrict_library,
)
from .errorprob import (
    ErrorBounds,
    PcepBounds,
    PcepQuadOptions,
    PcepResult,
    distance_cdf_ub,
    effective_error,
    error_prob_bounds,
    expected_error_ub,
    expected_pcep_ub,
    g_factor,
    pcep_bounds,
    pcep_exact,
    pcep_exact_detailed,
    sin2max_cdf_ub,
)
from .errors import (
    DimensionError,
    OrthonormalityError,
    PackingFileError,
    QuadratureError,
    TooFewClassesError,
)
from .grassmann import (
    ClassLibrary,
    Frame,
    MinDistances,
    PackingBounds,
    PackingOptions,
    PackingReport,
    chordal_distance_sq,
    min_distances,
    pack,
    packing_bounds,
    pairwise_distance_sq,
    principal_angles,
    read_packing,
    sample_isotropic,
    write_packing,
)
from .harness import ExperimentConfig, erasure_error_mc, load_config, main
from .seeding import as_generator, spawn

__version__ = "0.1.0"

__all__ = [
    "CapacityQuery",
    "CapacityResult",
    "capacity_random_lb",
    "capacity_selection_asymptotic",
    "capacity_selection_lb",
    "capacity_selection_ub",
    "empirical_capacity",
    "ergodic_capacity",
    "fastfading_capacity",
    "outage_capacity",
    "selection_exponents",
    "ChannelParams",
    "FastFading",
    "ergodic_rate",
    "ergodic_rate_mc",
    "feature_budget",
    "make_erasure_mask",
    "outage_prob",
    "outage_rate",
    "pmf_received_binomial",
    "pmf_received_poisson",
    "poisson_approx_tv",
    "rate_siso",
    "sample_rayleigh_gain",
    "ErrorEstimate",
    "apply_erasure",
    "classify_ml",
    "estimate_error_mc",
    "generate_sample",
    "loglik_scores",
    "pairwise_error_mc",
    "restrict_library",
    "ErrorBounds",
    "PcepBounds",
    "PcepQuadOptions",
    "PcepResult",
    "distance_cdf_ub",
    "effective_error",
    "error_prob_bounds",
    "expected_error_ub",
    "expected_pcep_ub",
    "g_factor",
    "pcep_bounds",
    "pcep_exact",
    "pcep_exact_detailed",
    "sin2max_cdf_ub",
    "DimensionError",
    "OrthonormalityError",
    "PackingFileError",
    "QuadratureError",
    "TooFewClassesError",
    "ClassLibrary",
    "Frame",
    "MinDistances",
    "PackingBounds",
    "PackingOptions",
    "PackingReport",
    "chordal_distance_sq",
    "min_distances",
    "pack",
    "packing_bounds",
    "pairwise_distance_sq",
    "principal_angles",
    "read_packing",
    "sample_isotropic",
    "write_packing",
    "ExperimentConfig",
    "erasure_error_mc",
    "load_config",
    "main",
    "as_generator",
    "spawn",
]

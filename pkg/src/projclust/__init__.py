"""Clustering of two-component high-dimensional mixtures by scanning
random 1-D projections, with the matching bound calculators and a Monte
Carlo verification harness."""

from .errors import (
    DegenerateMixtureError,
    DimensionMismatchError,
    DomainError,
    InsufficientSampleError,
    NoBoundaryError,
    NumericError,
    ProjclustError,
    UnsupportedError,
)
from .mathkit import (
    RngStream,
    chi2_lower_tail_exponent,
    chi2_upper_tail_exponent,
    q_function,
    q_inverse,
    q_lower_bound,
)
from .model import (
    Boundary1D,
    ClusterOutcome,
    CovarianceSpec,
    Dataset,
    Mixture1D,
    MixtureSpec,
    Provenance,
    c_separability,
    lambda_max,
)
from .projection import (
    Projection1D,
    project,
    projected_mixture,
    sample_direction,
    separability_1d,
)
from .learner1d import (
    FitReport,
    bayes_error,
    bayes_thresholds,
    estimated_separability_bound,
    fit_em,
    fit_mixture,
    fit_mom,
)
from .bounds import (
    BoundReport,
    beta_full_rank,
    error_gap_bound,
    expected_projections_nonspherical,
    expected_projections_spherical,
    hd_bayes_error_bound,
    kgmm_failure_bound,
    kgmm_projection_bound,
    nonspherical_direction_prob,
    optimize_tau,
    sample_size_required,
    spherical_direction_prob,
    sublog_regime_check,
)
from .datagen import (
    make_rank_spec,
    make_spherical_spec,
    read_dataset,
    sample_dataset,
    sample_nongaussian_dataset,
    write_dataset,
)
from .clusterer import (
    ClusterConfig,
    classify,
    cluster_gmm,
    clustering_error,
    estimate_c_hat,
    projections_budget_default,
    scan_directions,
)

__version__ = "0.1.0"

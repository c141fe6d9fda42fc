"""circdeconv: quadratic functional estimation and uniformity testing for
densities observed through circular convolution with a known error density.

The observation model is Y = X + eps mod 1 on [0, 1). The package
estimates the squared L2 distance of the density of X to the uniform
density, tests uniformity at a prescribed level, evaluates the matching
theoretical rates and lower-bound constructions, and ships a reproducible
Monte Carlo harness with a CLI front end.
"""

from .errors import (
    CalibrationError,
    CertificationError,
    CircdeconvError,
    ClassNotSummable,
    ConditionViolation,
    DimensionNotFound,
    IngestError,
    InvalidDensityError,
)
from .estimation import (
    EmpiricalCoeffs,
    RiskBoundBreakdown,
    empirical_coeffs,
    empirical_coeffs_batch,
    estimate_q,
    estimate_q_batch,
    estimate_q_clamped,
    optimal_dim_est,
    risk_upper_bound,
    u_statistic_form,
    unbiased_sq_modulus,
)
from .fourier import (
    FourierDensity,
    NoiseModel,
    SmoothnessClass,
    convolve,
    ellipsoid_membership,
    quadratic_functional,
    truncated_functional,
    truncated_functional_observed,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    emit_report,
    ingest_circular_data,
    load_report,
    run_risk_experiment,
    run_test_experiment,
)
from .lowerbounds import (
    HypercubeFamily,
    TwoPointPair,
    build_hypercube,
    build_two_point,
    chi2_mixture_bound,
    cube_product_identity,
    exact_mixture_chi2,
    find_eta,
    hellinger_reduction_bound,
    mc_chi2_estimate,
    optimal_two_point_freq,
    testing_to_estimation_lb,
)
from .rates import (
    OrderDescriptor,
    RateReport,
    RegimeSpec,
    ScanRow,
    base_term,
    fit_log_rate,
    fit_rate,
    numeric_rate_scan,
    theoretical_estimation_rate,
    theoretical_testing_radius,
)
from .sampling import (
    CircularSample,
    Rng,
    load_binary,
    load_csv,
    sample_batch,
    sample_density,
    sample_model,
    sample_observed,
    save_binary,
    save_csv,
    wrap_add,
)
from .testing import (
    TestCalibration,
    TestResult,
    calibrate,
    custom_calibration,
    nu_k_sq,
    radius_upper,
    run_test,
)

__version__ = "0.1.0"

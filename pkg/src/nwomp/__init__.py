"""Sparse recovery with norm-weighted orthogonal matching pursuit.

Sensing matrices with unequal column norms, the weighted-selection OMP that
handles them, calculators for every closed-form recovery guarantee, and a
seeded Monte Carlo harness for NMSE and support-recovery experiments.
"""

from .guarantees import (
    DEFAULT_RHO_OVER_SIGMA,
    GuaranteeInputs,
    GuaranteeReport,
    alpha_for_rho_ratio,
    empirical_event_check,
    event_probability_lower_bound,
    evaluate_report,
    full_report,
    gram_inverse_eigen_bound,
    min_coefficient_threshold,
    mse_upper_bound,
    noiseless_max_sparsity,
    rho,
    support_recovery_condition,
)
from .matrices import (
    CsMatrix,
    UnitModulusCode,
    build_cs_matrix,
    circulant_measurement_matrix,
    dft_matrix,
    mutual_coherence,
    normalize_frobenius,
    quantized_flat_code,
    random_low_res_code,
    search_code_by_norm_ratio,
    zadoff_chu,
)
from .omp import (
    DEFAULT_BACKEND,
    OmpTrace,
    RankDeficiencyError,
    available_backends,
    least_squares_on_support,
    omp_recover,
)
from .signals import (
    MeasurementSet,
    SparseSignal,
    child_seed,
    measure,
    sample_sparse_signal,
    sample_sparse_signal_with_floor,
)
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    nmse_db,
    run_nmse_experiment,
    run_support_experiment,
)

__version__ = "0.1.0"

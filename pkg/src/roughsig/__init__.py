"""Numerical toolkit for signatures of bounded-variation paths,
control-balanced dyadic partitions, multiplicative extension of controlled
functionals, uniform closeness estimates, and the linear-CDE application."""

from .tensor import (
    TruncatedTensor,
    truncated_product,
    level_norms,
    segment_signature,
    tensor_allclose,
)
from .path import (
    PiecewiseLinearPath,
    Control,
    ControlledFunctional,
    SignatureFunctional,
    signature,
    one_variation,
    arc_length_control,
    calibrated_control,
    shared_calibrated_control,
    sinusoid_perturbation,
)
from .partition import (
    DyadicPartition,
    NonMonotoneControlError,
    balance_point,
    total_dyadic_partition,
    balance_residuals,
    max_subinterval_control,
)
from .extension import (
    ExtensionConfig,
    ExtensionError,
    hat_partition_product,
    drop_point_defect,
    lyons_extend,
    lyons_extend_verbose,
    extend_one_level,
    ExtendedFunctional,
    difference_hat_top_norms,
    extension_beta_floor,
)
from .bounds import (
    frac_factorial,
    neoclassical_sides,
    classify_case,
    beta_threshold,
    EstimateParams,
    theorem_rhs,
    main_lemma_increment_bound,
    dyadic_cutoff_N,
    VacuousBoundError,
    simplex_pairs,
    measure_epsilon,
    verify_uniform_estimate,
    EstimateReport,
)
from .cde import (
    LinearCdeProblem,
    solve_exact,
    solve_exact_trajectory,
    solve_series,
    series_tail_bound,
    flow_difference_bound,
)

__version__ = "0.1.0"

"""uvboot: pairwise u/v-statistics, the multinomial m-out-of-n bootstrap,
jackknife studentization, and a Monte Carlo harness that checks the
asymptotic laws behind them at desk scale."""

from ._version import __version__
from .arrays import (
    ArraySpec,
    exceedance_rate,
    marcinkiewicz_scale,
    symmetric_array_mean,
    weighted_array_sum,
)
from .boot import (
    BootstrapReplicate,
    ConfidenceInterval,
    DegenerateNormalizerError,
    HoeffdingSplit,
    ReplicateEngine,
    bootstrap_ci,
    bootstrap_u,
    bootstrap_v,
    hoeffding_split,
    studentized_pivot,
)
from .datagen import (
    DistSpec,
    MixingSpec,
    ar1_pairwise_product_mean,
    ar1_sample,
    dist_abs_mean,
    dist_mean,
    dist_var,
    iid_sample,
    pareto_abs_moment,
)
from .kernels import (
    DimensionMismatchError,
    Kernel,
    ProjectionSummary,
    Sample,
    UnknownKernelError,
    degeneracy_check,
    empirical_projection,
    eval_builtin,
    get_kernel,
    kernel_ids,
)
from .mc import (
    DegenerateKernelError,
    ExperimentConfig,
    ExperimentError,
    MomentConditionError,
    Report,
    ks_statistic,
    run_array_lln_experiment,
    run_clt_experiment,
    run_consistency_experiment,
    run_coverage_experiment,
    run_experiment,
    run_marcinkiewicz_experiment,
)
from .ustat import (
    JackknifeEstimate,
    PairSums,
    deleted_u_all,
    jackknife_sigma2,
    pair_sums,
    u_statistic,
    v_statistic,
)
from .weights import (
    Dispersion,
    WeightVector,
    derive_stream,
    draw_weights,
    replicate_stream,
    weight_dispersion,
)

__all__ = [
    "ArraySpec",
    "BootstrapReplicate",
    "ConfidenceInterval",
    "DegenerateKernelError",
    "DegenerateNormalizerError",
    "DimensionMismatchError",
    "Dispersion",
    "DistSpec",
    "ExperimentConfig",
    "ExperimentError",
    "HoeffdingSplit",
    "JackknifeEstimate",
    "Kernel",
    "MixingSpec",
    "MomentConditionError",
    "PairSums",
    "ProjectionSummary",
    "ReplicateEngine",
    "Report",
    "Sample",
    "UnknownKernelError",
    "WeightVector",
    "__version__",
    "ar1_pairwise_product_mean",
    "ar1_sample",
    "bootstrap_ci",
    "bootstrap_u",
    "bootstrap_v",
    "degeneracy_check",
    "deleted_u_all",
    "derive_stream",
    "dist_abs_mean",
    "dist_mean",
    "dist_var",
    "draw_weights",
    "empirical_projection",
    "eval_builtin",
    "exceedance_rate",
    "get_kernel",
    "hoeffding_split",
    "iid_sample",
    "jackknife_sigma2",
    "kernel_ids",
    "ks_statistic",
    "marcinkiewicz_scale",
    "pair_sums",
    "pareto_abs_moment",
    "replicate_stream",
    "run_array_lln_experiment",
    "run_clt_experiment",
    "run_consistency_experiment",
    "run_coverage_experiment",
    "run_experiment",
    "run_marcinkiewicz_experiment",
    "studentized_pivot",
    "symmetric_array_mean",
    "u_statistic",
    "v_statistic",
    "weight_dispersion",
    "weighted_array_sum",
]

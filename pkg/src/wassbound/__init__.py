"""Exact W1 distances between finitely supported measures, explicit
non-asymptotic deviation bounds for empirical and occupation measures, and
Monte-Carlo validation of those bounds."""

from .metric_measure import (
    EUCLIDEAN,
    SUP_NORM,
    DiscreteMeasure,
    Metric,
    MomentReport,
    Sampler,
    estimate_m1,
    find_exp_rate,
    holder_norm,
    moment_report,
    sample_empirical,
)
from .wasserstein import (
    Coupling,
    DualCertificate,
    GaussianCdf,
    UniformCdf,
    dual_gap,
    keep_in_place_coupling,
    optimal_potential,
    quantize,
    w1_1d,
    w1_cost,
    w1_exact,
    w1_vs_continuous_1d,
)
from .rate_functions import (
    ConjugateValue,
    GozlanLeonard,
    ModifiedBV,
    Quadratic,
    RateFunction,
    ScaledRate,
    TableRate,
    bobkov_gotze_check,
    conjugate,
    gamma,
    gozlan_leonard_rate,
    modified_t1_from_exp_moment,
    rate_markov_transform,
    sigma_forward,
    sigma_inverse,
    t1_from_gaussian_moment,
)
from .covering import (
    CoverResult,
    FiniteMetricSpace,
    TreeNet,
    enumerate_tree_net,
    greedy_cover,
    n_euclidean_ball,
    n_holder_ball,
    n_lipschitz_crude,
    n_lipschitz_tree,
    theta,
)
from .bounds import (
    BoundReport,
    CompactChoice,
    bound_gaussian_banach,
    bound_main,
    bound_modified,
    bound_rd,
    bound_t1,
    bound_variant,
    concentration_around_mean,
    euclidean_ball_compact,
    euclidean_cover_rule,
    gaussian_tail,
    holder_ball_compact,
    holder_cover_rule,
    holder_moment_constant,
    mean_bound,
    mean_bound_quantized,
    required_tail,
    solve_compact_radius,
)
from .markov import (
    ChainRun,
    MarkovKernel,
    ar1_kernel,
    bound_markov,
    build_reference,
    estimate_contraction,
    finite_chain_kernel,
    invariant_distance_bound,
    markov_rate_a,
    occupation_deviation_mc,
    reflected_rw_kernel,
    simulate_chain,
)
from .harness import (
    ComparisonRow,
    ExperimentConfig,
    iid_deviation_mc,
    report_tables,
    run_experiment,
)

__version__ = "0.1.0"

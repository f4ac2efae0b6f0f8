"""Bounds on the expected optimality of random feasible solutions, with
Monte-Carlo and random-graph experiments that check them."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundCase,
    BoundReport,
    ConstantKind,
    MomentSpec,
    OrderIndex,
    ProblemShape,
    approx_factor_bound,
    corollary1_predicate,
    harmonic_half,
    harmonic_half_bounds,
    order_stat_expectation_bounds,
    steiner_specific_bound,
    trimmed_max_sum_upper_bound,
    trimmed_min_sum_lower_bound,
)
from .instances import (  # noqa: E402
    DistributionSpec,
    Seed,
    SteinerInstance,
    WeightedGraph,
    assign_weights,
    gen_gnm,
    pick_terminals,
)
from .solvers import (  # noqa: E402
    FeasibilityPredicate,
    Forest,
    brute_force_mst,
    brute_force_steiner,
    check_feasible,
    mst,
    random_feasible_tree,
    steiner_2approx,
)

__all__ = [
    "__version__",
    "BoundCase",
    "BoundReport",
    "ConstantKind",
    "MomentSpec",
    "OrderIndex",
    "ProblemShape",
    "approx_factor_bound",
    "corollary1_predicate",
    "harmonic_half",
    "harmonic_half_bounds",
    "order_stat_expectation_bounds",
    "steiner_specific_bound",
    "trimmed_max_sum_upper_bound",
    "trimmed_min_sum_lower_bound",
    "DistributionSpec",
    "Seed",
    "SteinerInstance",
    "WeightedGraph",
    "assign_weights",
    "gen_gnm",
    "pick_terminals",
    "FeasibilityPredicate",
    "Forest",
    "brute_force_mst",
    "brute_force_steiner",
    "check_feasible",
    "mst",
    "random_feasible_tree",
    "steiner_2approx",
]

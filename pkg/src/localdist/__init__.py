"""Distance of bipartite nonsignaling behaviors from the local polytope.

The solver alternates weighted least-squares fits over a working set of
deterministic strategies with a separation oracle on the residual,
maintaining certified upper and lower bounds on the squared distance.
"""

from .behavior import (
    Behavior,
    BehaviorDims,
    MeasurementWeights,
    ValidationReport,
    functional_value,
    ns_dimension,
    residual,
    validate_behavior,
)
from .errors import DimensionMismatch, EnumerationCapExceeded, SchemaError
from .oracle import (
    OracleAnswer,
    OracleConfig,
    block_maximize,
    brute_force_oracle,
    multistart_oracle,
    oracle_value,
    sweep_alice,
    sweep_bob,
)
from .quantum import (
    MeasurementFamily,
    TwoQubitState,
    planar_family,
    pr_box,
    qubit_behavior,
    random_local_mixture,
)
from .restricted import (
    RestrictedSolution,
    RestrictedSolveParams,
    certify_zero_weight,
    rescale_slackness,
    restricted_beta,
    restricted_lower_bound,
    solve_restricted,
)
from .solver import (
    SolveOptions,
    SolveReport,
    TraceRow,
    compute_distance,
    duality_gap,
    global_lower_bound,
    reference_distance,
)
from .strategies import (
    StrategyPair,
    WeightedVertexSet,
    local_mixture,
    vertex_behavior,
)

__version__ = "0.1.0"

__all__ = [
    "Behavior",
    "BehaviorDims",
    "MeasurementWeights",
    "ValidationReport",
    "functional_value",
    "ns_dimension",
    "residual",
    "validate_behavior",
    "DimensionMismatch",
    "EnumerationCapExceeded",
    "SchemaError",
    "OracleAnswer",
    "OracleConfig",
    "block_maximize",
    "brute_force_oracle",
    "multistart_oracle",
    "oracle_value",
    "sweep_alice",
    "sweep_bob",
    "MeasurementFamily",
    "TwoQubitState",
    "planar_family",
    "pr_box",
    "qubit_behavior",
    "random_local_mixture",
    "RestrictedSolution",
    "RestrictedSolveParams",
    "certify_zero_weight",
    "rescale_slackness",
    "restricted_beta",
    "restricted_lower_bound",
    "solve_restricted",
    "SolveOptions",
    "SolveReport",
    "TraceRow",
    "compute_distance",
    "duality_gap",
    "global_lower_bound",
    "reference_distance",
    "StrategyPair",
    "WeightedVertexSet",
    "local_mixture",
    "vertex_behavior",
    "__version__",
]

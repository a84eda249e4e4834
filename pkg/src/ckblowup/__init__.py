"""Transversal cycle tilings of cyclically structured multipartite graphs.

A graph here has k parts of equal size n with edges only between
cyclically consecutive parts.  The package provides exact searches for
maximum transversal cycle tilings and minimum covers, extremal
constructions, a three-part move machine that reaches a near factor
under summed degree hypotheses, a randomized absorption pipeline for
full factors above the asymptotic threshold, and exact-arithmetic
certificates for the inequality systems behind the counting steps.
"""

from .core import (
    JSON_FORMAT,
    BlowupGraph,
    DegreeProfile,
    PreconditionError,
    VertexRef,
    build_graph,
    common_neighborhood,
    degree,
    degree_profile,
    graph_from_json,
    graph_from_json_dict,
    graph_to_dot,
    graph_to_json,
    graph_to_json_dict,
    part_after,
    part_before,
    validate_cycle,
    validate_tiling,
    uncovered,
)
from .matching import (
    hall_violator,
    hall_violator_matrix,
    max_matching,
    max_matching_matrix,
    simultaneous_matching,
)
from .generators import (
    CollapseMap,
    CoverExample,
    ReduceResult,
    collapse,
    collapse_with_least_matching,
    complete_blowup,
    cover_example,
    haggkvist_example,
    random_min_degree,
    reduce_small_deltas,
)
from .exact import (
    CoverResult,
    InfeasibleSizeError,
    LinkedResult,
    LinkingCount,
    MaxTilingResult,
    cover_number,
    enumerate_linking,
    has_factor,
    independence_number,
    is_cover,
    is_linked,
    linking_pattern,
    max_tiling,
)
from .swap3 import (
    CounterexampleError,
    LabeledTiling,
    Labeling,
    NearFactorResult,
    near_factor3,
    relabel_abc,
)
from .constructive import (
    AbsorberSet,
    FactorResult,
    Gadget,
    PoolConditionError,
    RoundResult,
    SampledAbsorber,
    StageFailure,
    asymp_factor,
    build_absorber,
    round_tiling,
    verify_absorber,
)
from .inequality import (
    ALL_SYSTEMS,
    Certificate,
    Constraint,
    DepthExhaustedError,
    FeasiblePoint,
    GridScanResult,
    System,
    certify_infeasible,
    grid_scan,
    lemma_system,
)

__version__ = "0.1.0"

__all__ = [
    "JSON_FORMAT",
    "BlowupGraph",
    "DegreeProfile",
    "PreconditionError",
    "VertexRef",
    "build_graph",
    "common_neighborhood",
    "degree",
    "degree_profile",
    "graph_from_json",
    "graph_from_json_dict",
    "graph_to_dot",
    "graph_to_json",
    "graph_to_json_dict",
    "part_after",
    "part_before",
    "validate_cycle",
    "validate_tiling",
    "uncovered",
    "hall_violator",
    "hall_violator_matrix",
    "max_matching",
    "max_matching_matrix",
    "simultaneous_matching",
    "CollapseMap",
    "CoverExample",
    "ReduceResult",
    "collapse",
    "collapse_with_least_matching",
    "complete_blowup",
    "cover_example",
    "haggkvist_example",
    "random_min_degree",
    "reduce_small_deltas",
    "CoverResult",
    "InfeasibleSizeError",
    "LinkedResult",
    "LinkingCount",
    "MaxTilingResult",
    "cover_number",
    "enumerate_linking",
    "has_factor",
    "independence_number",
    "is_cover",
    "is_linked",
    "linking_pattern",
    "max_tiling",
    "CounterexampleError",
    "LabeledTiling",
    "Labeling",
    "NearFactorResult",
    "near_factor3",
    "relabel_abc",
    "AbsorberSet",
    "FactorResult",
    "Gadget",
    "PoolConditionError",
    "RoundResult",
    "SampledAbsorber",
    "StageFailure",
    "asymp_factor",
    "build_absorber",
    "round_tiling",
    "verify_absorber",
    "ALL_SYSTEMS",
    "Certificate",
    "Constraint",
    "DepthExhaustedError",
    "FeasiblePoint",
    "GridScanResult",
    "System",
    "certify_infeasible",
    "grid_scan",
    "lemma_system",
    "__version__",
]

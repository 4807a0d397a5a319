"""Exact interpolation and ranking over partially ordered [0,1] variables.

Variables live in [0, 1] under order constraints ``x <= y`` and pinned
exact values.  The admissible points form a polytope; unknown variables
are interpolated as expected values under the uniform distribution over
that polytope, with all arithmetic exact (rational).  The package also
ranks variables under three top-k semantics, carries a polynomial-time
engine for tree-shaped constraint sets, and a hit-and-run sampler for
everything too large for exact enumeration.
"""

from .errors import (
    BudgetExceededError,
    ContradictionError,
    LimitExceededError,
    MalformedInputError,
    OrdpolyError,
    PersistentTieError,
    SamplerError,
    ShapeError,
)
from .poly import (
    NonNormalizedError,
    PiecewisePolynomial,
    Polynomial,
    Rational,
    format_rational,
    interpolating_polynomial,
    order_statistic_density,
    parse_rational,
    poly_antideriv,
    poly_integrate,
    poly_mul,
    pw_expectation,
)
from .model import (
    SHAPE_GENERAL,
    SHAPE_REVERSE_TREE,
    SHAPE_TOTAL_ORDER,
    SHAPE_TREE,
    ConsistencyReport,
    ConstraintSet,
    HasseDiagram,
    PartSkeleton,
    TieQuotient,
    UninfluenceDecomposition,
    VariableId,
    check_consistency,
    classify_shape,
    close_under_implication,
    collapse_ties,
    decompose,
    flip_constraints,
    hasse,
    part_skeleton,
    polytope_dimension,
)
from . import fileio
from .exact import (
    DEFAULT_BUDGET,
    FragmentView,
    LinearExtension,
    count_extensions,
    enumerate_extensions,
    expected_rank,
    expected_val_frag,
    extension_volumes,
    interpolate_all,
    interpolate_exact,
    marginal_exact,
    volume_exact,
    volume_frag,
)
from .tree import (
    ConstraintTree,
    SubtreeVolumeFn,
    as_tree,
    interpolate_decomposed,
    interpolate_tree,
    marginal_decomposed,
    marginal_tree,
    subtree_volume_fns,
    tree_from_part,
    volume_tree,
)
from .stable import (
    StabilityReport,
    StableAssignment,
    check_stability,
    stable_interpolate,
)
from .topk import (
    SEMANTICS_GLOBAL,
    SEMANTICS_LOCAL,
    SEMANTICS_U,
    ContainmentReport,
    SelectionPredicate,
    TopKResult,
    check_containment,
    global_topk,
    local_topk,
    select,
    u_sequence_probabilities,
    u_topk,
)
from .sampler import (
    EstimateResult,
    SamplePoint,
    SamplerConfig,
    estimate_expected_value,
    estimate_topk,
    hit_and_run_sample,
    interior_point,
    rejection_sample_mean,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "SHAPE_GENERAL",
    "SHAPE_REVERSE_TREE",
    "SHAPE_TOTAL_ORDER",
    "SHAPE_TREE",
    "ConsistencyReport",
    "ConstraintSet",
    "ConstraintTree",
    "ContainmentReport",
    "ContradictionError",
    "DEFAULT_BUDGET",
    "EstimateResult",
    "FragmentView",
    "HasseDiagram",
    "LimitExceededError",
    "LinearExtension",
    "MalformedInputError",
    "NonNormalizedError",
    "OrdpolyError",
    "PartSkeleton",
    "PersistentTieError",
    "PiecewisePolynomial",
    "Polynomial",
    "Rational",
    "SEMANTICS_GLOBAL",
    "SEMANTICS_LOCAL",
    "SEMANTICS_U",
    "SamplePoint",
    "SamplerConfig",
    "SamplerError",
    "SelectionPredicate",
    "ShapeError",
    "StabilityReport",
    "StableAssignment",
    "SubtreeVolumeFn",
    "TieQuotient",
    "TopKResult",
    "UninfluenceDecomposition",
    "VariableId",
    "__version__",
    "as_tree",
    "check_consistency",
    "check_containment",
    "check_stability",
    "classify_shape",
    "close_under_implication",
    "collapse_ties",
    "count_extensions",
    "decompose",
    "enumerate_extensions",
    "estimate_expected_value",
    "estimate_topk",
    "expected_rank",
    "expected_val_frag",
    "extension_volumes",
    "fileio",
    "flip_constraints",
    "format_rational",
    "global_topk",
    "hasse",
    "hit_and_run_sample",
    "interior_point",
    "interpolate_all",
    "interpolate_decomposed",
    "interpolate_exact",
    "interpolate_tree",
    "interpolating_polynomial",
    "local_topk",
    "marginal_decomposed",
    "marginal_exact",
    "marginal_tree",
    "order_statistic_density",
    "parse_rational",
    "part_skeleton",
    "poly_antideriv",
    "poly_integrate",
    "poly_mul",
    "polytope_dimension",
    "pw_expectation",
    "rejection_sample_mean",
    "select",
    "stable_interpolate",
    "subtree_volume_fns",
    "tree_from_part",
    "u_sequence_probabilities",
    "u_topk",
    "volume_exact",
    "volume_frag",
    "volume_tree",
]
